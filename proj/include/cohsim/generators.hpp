#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "cohsim/types.hpp"

namespace cohsim {

enum class WorkloadKind : uint8_t { Locks, Arrays, PseudoServer };

WorkloadKind parse_workload(std::string_view name);
const char* to_string(WorkloadKind kind);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Locks;
  int num_cores = 8;
  uint64_t num_refs = 5'000'000;
  uint64_t seed = 1;

  // locks
  uint32_t num_locks = 3;
  double lock_step_chance = 0.10;
  uint64_t private_bytes = 64 * 1024;

  // arrays: elements per row; rows are per-core with shared borders
  uint32_t row_length = 32;

  // server: shared public section read by clients, written by core 0,
  // plus one private slice per client
  uint64_t public_bytes = 8 * 1024;
  uint64_t slice_bytes = 1024;

  void validate() const;
};

/// Deterministic source: same spec, same records, byte-identical traces.
/// Wraps std::mt19937_64 with explicit reductions so the mapping from raw
/// engine output to bounded draws is pinned here rather than in the stdlib.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  /// Uniform in [0, n).  n must be nonzero.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  /// True with probability p (one draw consumed either way).
  bool chance(double p) {
    constexpr double kInv2e53 = 1.0 / 9007199254740992.0;
    return static_cast<double>(gen_() >> 11) * kInv2e53 < p;
  }

  static constexpr const char* kAlgorithm = "mt19937_64";

 private:
  std::mt19937_64 gen_;
};

class TraceGenerator {
 public:
  explicit TraceGenerator(const WorkloadSpec& spec);
  virtual ~TraceGenerator() = default;

  /// Next record, or nullopt once num_refs records have been emitted.  A
  /// model step that would overshoot is truncated mid-pattern.
  std::optional<MemoryRef> next();

  /// "# key: value" payload lines describing the workload, written at the top
  /// of generated traces.
  std::vector<std::string> header() const;

  const WorkloadSpec& spec() const { return spec_; }

 protected:
  /// Appends one model step's records (at least one).
  virtual void produce(std::vector<MemoryRef>& out) = 0;
  virtual void describe(std::vector<std::string>& lines) const = 0;

  WorkloadSpec spec_;
  Rng rng_;

 private:
  std::deque<MemoryRef> pending_;
  std::vector<MemoryRef> scratch_;
  uint64_t emitted_ = 0;
};

std::unique_ptr<TraceGenerator> make_generator(const WorkloadSpec& spec);

/// Writes the header comments followed by exactly spec.num_refs records.
void write_trace(const WorkloadSpec& spec, std::ostream& out);

}  // namespace cohsim
