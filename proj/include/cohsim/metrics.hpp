#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cohsim/types.hpp"

namespace cohsim {

enum class EventKind : uint8_t {
  Load,
  Store,
  ReadReq,
  InvalidateReq,
  UpdateReq,
  Writeback,
};

struct CoreCounts {
  uint64_t loads = 0;
  uint64_t stores = 0;
  uint64_t read_reqs = 0;
  uint64_t invalidates = 0;
  uint64_t updates = 0;
  uint64_t writebacks = 0;

  /// Bus transactions only; writebacks are bookkeeping, not transactions.
  uint64_t transactions() const { return read_reqs + invalidates + updates; }

  CoreCounts& operator+=(const CoreCounts& o);
  bool operator==(const CoreCounts&) const = default;
};

class MetricsTable {
 public:
  MetricsTable() = default;
  explicit MetricsTable(int num_cores);

  void record(int core, EventKind kind);
  void record(int core, TxnKind kind);

  int num_cores() const { return static_cast<int>(per_core_.size()); }
  const CoreCounts& core(int i) const;
  CoreCounts totals() const;
  uint64_t total_transactions() const { return totals().transactions(); }
  uint64_t total_refs() const {
    const CoreCounts t = totals();
    return t.loads + t.stores;
  }

  bool operator==(const MetricsTable&) const = default;

 private:
  std::vector<CoreCounts> per_core_;
};

/// Provenance block carried into the JSON report.
struct RunInfo {
  std::string scheme;
  CacheGeometry geometry;
  std::string trace;
  bool verify = false;
};

/// Header "core,loads,stores,read_reqs,invalidates,updates,writebacks", one
/// row per core, then a "total" row.
std::string render_csv(const MetricsTable& m);

std::string render_json(const MetricsTable& m, const RunInfo& info);

}  // namespace cohsim
