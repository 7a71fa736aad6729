#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cohsim/generators.hpp"
#include "cohsim/scheme.hpp"
#include "cohsim/types.hpp"

namespace cohsim {

/// One workload axis entry: either a synthetic kind or an external trace.
struct SweepWorkload {
  bool external = false;
  WorkloadKind kind = WorkloadKind::Locks;
  std::string trace_path;
  std::string name;
};

struct SweepPlan {
  std::vector<SweepWorkload> workloads;
  std::vector<int> core_counts = {2, 4, 8, 16};
  std::vector<SchemeConfig> schemes;  // empty -> default battery per cell
  uint64_t num_refs = 1'000'000;
  uint64_t seed = 1;
  CacheGeometry geometry;     // num_cores is overridden per cell
  WorkloadSpec params;        // workload knobs shared across cells
  std::string trace_dir = "sweep-traces";
  int jobs = 1;

  void validate() const;
};

/// The default scheme battery for a cell with `cores` cores: inv, upd,
/// threshold 1..3, adapted, sharers 2..cores.
std::vector<SchemeConfig> default_schemes(int cores);

struct SweepRow {
  std::string workload;
  int cores = 0;
  std::string scheme;
  std::string param;
  uint64_t read_reqs = 0;
  uint64_t invalidates = 0;
  uint64_t updates = 0;
  uint64_t total = 0;
  bool failed = false;
  std::string error;
};

/// Materializes each generated workload's trace once per core count, then
/// replays it under every scheme.  Cells run on `plan.jobs` threads; a cell
/// failure marks its row and the remaining cells still run.
std::vector<SweepRow> execute(const SweepPlan& plan);

/// Header "workload,cores,scheme,param,read_reqs,invalidates,updates,total".
/// Failed rows are omitted.
std::string render_sweep_csv(const std::vector<SweepRow>& rows);

/// Plan files are "key = value" lines with '#' comments.  Lists are
/// comma-separated.  Keys: workloads, traces, cores, schemes, refs, seed,
/// trace-dir, jobs, sets, ways, block-bytes, row-length, private-bytes,
/// public-bytes, locks.
SweepPlan parse_plan(std::istream& in);

}  // namespace cohsim
