#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cohsim/errors.hpp"
#include "cohsim/metrics.hpp"
#include "cohsim/scheme.hpp"
#include "cohsim/types.hpp"

namespace cohsim {

class TraceReader;

/// Bus-side view of which caches hold a valid copy of each block.  Entries
/// are erased as soon as the last copy disappears, so the map never outgrows
/// the combined capacity of the caches.
class SharerDirectory {
 public:
  bool holds(uint64_t block, int core) const {
    const uint16_t* m = find(block);
    return m && (*m >> core) & 1u;
  }
  int count(uint64_t block) const;
  int count_excluding(uint64_t block, int core) const;
  uint16_t mask(uint64_t block) const {
    const uint16_t* m = find(block);
    return m ? *m : 0;
  }
  void add(uint64_t block, int core) { sharers_[block] |= uint16_t(1u << core); }
  void remove(uint64_t block, int core);
  /// Leaves `core` as the sole holder.
  void isolate(uint64_t block, int core) { sharers_[block] = uint16_t(1u << core); }

  size_t size() const { return sharers_.size(); }
  const std::unordered_map<uint64_t, uint16_t>& entries() const { return sharers_; }

 private:
  const uint16_t* find(uint64_t block) const {
    auto it = sharers_.find(block);
    return it == sharers_.end() ? nullptr : &it->second;
  }
  std::unordered_map<uint64_t, uint16_t> sharers_;
};

struct Violation {
  std::string rule;
  uint64_t block = 0;
  std::vector<std::pair<int, CoherenceState>> holders;
  std::string detail;

  std::string to_string() const;
};

struct VerificationError : std::runtime_error {
  explicit VerificationError(Violation v)
      : std::runtime_error(v.to_string()), violation(std::move(v)) {}
  Violation violation;
};

struct EngineOptions {
  /// Maintain version stamps and check protocol invariants while stepping.
  bool verify = false;
  /// Full-state rescan cadence in verify mode (affected blocks are always
  /// checked every step).
  uint64_t full_check_interval = 65536;
  /// Count a core's own read misses toward its line counters as well.  The
  /// counter rules only name reads "seen on the bus" by other caches; this
  /// switch exists to measure how much the broader reading would matter.
  bool own_reads_increment_counter = false;
};

/// Trace-driven multicore cache simulator: per-core set-associative caches
/// kept coherent by a snoopy MOESI bus, with the write-propagation decision
/// delegated to a SchemeConfig.  Functional model: one reference resolves
/// fully (at most one bus transaction) before the next begins.
class Engine {
 public:
  Engine(const CacheGeometry& geom, const SchemeConfig& scheme,
         const EngineOptions& opts = {});

  /// Applies one reference and returns the bus transaction it caused, if any.
  /// Throws InputError for a core id outside the configured range and
  /// VerificationError when verify mode catches an invariant violation.
  std::optional<BusTransaction> step(const MemoryRef& ref);

  const MetricsTable& metrics() const { return metrics_; }
  const CacheGeometry& geometry() const { return geom_; }
  const SchemeConfig& scheme() const { return scheme_; }
  const EngineOptions& options() const { return opts_; }
  const SharerDirectory& directory() const { return dir_; }
  uint64_t steps() const { return steps_; }

  /// Full-state invariant scan; nullopt when everything holds.  Works with or
  /// without verify mode (version checks need verify mode's stamps and are
  /// skipped otherwise).
  std::optional<Violation> verify_invariants() const;

  CoherenceState line_state(int core, uint64_t addr) const;
  uint32_t line_counter(int core, uint64_t addr) const;
  const CacheLine& line_at(int core, uint32_t set, uint32_t way) const;

  /// Test hook: overwrites one way, bypassing the protocol.  When
  /// sync_directory is set the sharer directory is patched to match, so the
  /// injected state is inconsistent only in the way the caller intends.  The
  /// slot's recency is kept; `line.recency` is ignored.
  void debug_set_line(int core, uint32_t set, uint32_t way, const CacheLine& line,
                      bool sync_directory = true);

 private:
  CacheLine& way_ref(int core, uint32_t set, uint32_t way) {
    return lines_[(static_cast<size_t>(core) * geom_.num_sets + set) * geom_.ways + way];
  }
  const CacheLine& way_ref(int core, uint32_t set, uint32_t way) const {
    return lines_[(static_cast<size_t>(core) * geom_.num_sets + set) * geom_.ways + way];
  }

  CacheLine* find_line(int core, uint32_t set, uint64_t tag);
  const CacheLine* find_line(int core, uint32_t set, uint64_t tag) const;

  std::optional<BusTransaction> local_read(int core, const BlockLocation& loc);
  std::optional<BusTransaction> local_write(int core, const BlockLocation& loc);

  void snoop_read(int issuer, const BlockLocation& loc);
  void snoop_invalidate(int issuer, const BlockLocation& loc);
  void snoop_update(int issuer, const BlockLocation& loc, uint64_t stamp);

  /// Choice order: empty way, else least-recent invalid resident, else
  /// least-recent overall.
  uint32_t pick_way(int core, uint32_t set) const;
  void evict(int core, uint32_t set, CacheLine& line);
  void touch(int core, uint32_t set, CacheLine& line);

  uint64_t memory_version(uint64_t block) const;
  void bump_version(uint64_t block, CacheLine& line);
  void check_read_freshness(int core, const BlockLocation& loc, const CacheLine& line) const;

  std::optional<Violation> check_block(uint64_t block) const;
  void check_step(uint64_t block);

  CacheGeometry geom_;
  SchemeConfig scheme_;
  EngineOptions opts_;
  std::vector<CacheLine> lines_;
  SharerDirectory dir_;
  MetricsTable metrics_;
  uint64_t steps_ = 0;
  uint64_t stamp_ = 0;
  std::optional<uint64_t> evicted_block_;
  std::unordered_map<uint64_t, uint64_t> memory_version_;
};

/// Runs every record from the reader through a fresh engine.  In verify mode
/// the periodic and final full-state scans throw on the first violation.
MetricsTable run_trace(TraceReader& reader, const CacheGeometry& geom,
                       const SchemeConfig& scheme, const EngineOptions& opts = {});

MetricsTable run_refs(const std::vector<MemoryRef>& refs, const CacheGeometry& geom,
                      const SchemeConfig& scheme, const EngineOptions& opts = {});

/// Source is any callable yielding std::optional<MemoryRef>.
MetricsTable run_source(const std::function<std::optional<MemoryRef>()>& next_ref,
                        const CacheGeometry& geom, const SchemeConfig& scheme,
                        const EngineOptions& opts = {});

}  // namespace cohsim
