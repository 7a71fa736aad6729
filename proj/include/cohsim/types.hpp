#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cohsim {

enum class Op : uint8_t { Load, Store };

constexpr int kMaxCores = 16;

/// One record of a trace: a load or store issued by a core to a byte address.
struct MemoryRef {
  Op op = Op::Load;
  int core = 0;
  uint64_t addr = 0;

  bool operator==(const MemoryRef&) const = default;
};

/// Where an address lands: global block number plus its (set, tag) split.
struct BlockLocation {
  uint64_t block = 0;
  uint32_t set = 0;
  uint64_t tag = 0;

  bool operator==(const BlockLocation&) const = default;
};

struct CacheGeometry {
  uint32_t num_sets = 64;
  uint32_t ways = 4;
  uint32_t block_bytes = 64;
  int num_cores = 2;

  void validate() const {
    if (num_sets == 0 || !std::has_single_bit(num_sets))
      throw std::invalid_argument("num_sets must be a power of two");
    if (ways == 0) throw std::invalid_argument("ways must be positive");
    if (block_bytes == 0 || !std::has_single_bit(block_bytes))
      throw std::invalid_argument("block_bytes must be a power of two");
    if (num_cores < 1 || num_cores > kMaxCores)
      throw std::invalid_argument("num_cores must be between 1 and 16");
  }

  constexpr BlockLocation block_of(uint64_t addr) const {
    const uint64_t block = addr / block_bytes;
    return {block, static_cast<uint32_t>(block % num_sets), block / num_sets};
  }

  constexpr uint64_t block_number(uint32_t set, uint64_t tag) const {
    return tag * num_sets + set;
  }

  /// First byte address of the block with the given (set, tag).
  constexpr uint64_t block_base(uint32_t set, uint64_t tag) const {
    return block_number(set, tag) * static_cast<uint64_t>(block_bytes);
  }

  constexpr uint64_t lines_per_cache() const {
    return static_cast<uint64_t>(num_sets) * ways;
  }

  bool operator==(const CacheGeometry&) const = default;
};

enum class CoherenceState : uint8_t { M, O, E, S, I };

constexpr bool is_valid(CoherenceState s) { return s != CoherenceState::I; }
constexpr bool is_owner(CoherenceState s) {
  return s == CoherenceState::M || s == CoherenceState::O;
}
constexpr bool is_dirty(CoherenceState s) { return is_owner(s); }
constexpr bool is_exclusive(CoherenceState s) {
  return s == CoherenceState::M || s == CoherenceState::E;
}

const char* to_string(CoherenceState s);
const char* to_string(Op op);

/// One way of a cache set.  `resident` distinguishes an invalidated line whose
/// tag is still known (counter survives) from a way that was never filled or
/// whose previous occupant was evicted.
struct CacheLine {
  uint64_t tag = 0;
  CoherenceState state = CoherenceState::I;
  bool resident = false;
  uint32_t counter = 0;
  uint32_t recency = 0;
  uint64_t version = 0;
};

enum class TxnKind : uint8_t { ReadReq, InvalidateReq, UpdateReq };

const char* to_string(TxnKind k);

struct BusTransaction {
  TxnKind kind = TxnKind::ReadReq;
  int issuer = 0;
  uint64_t block = 0;

  bool operator==(const BusTransaction&) const = default;
};

}  // namespace cohsim
