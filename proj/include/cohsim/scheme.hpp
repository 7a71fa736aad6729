#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cohsim/types.hpp"

namespace cohsim {

enum class SchemeVariant : uint8_t {
  InvalidateOnly,
  UpdateOnly,
  Threshold,
  AdaptedMoesi,
  NumSharers,
};

enum class PolicyDecision : uint8_t { Invalidate, Update };

/// A write-propagation policy.  `threshold` is read only by Threshold,
/// `min_sharers` only by NumSharers; `counter_ceiling` caps the per-line read
/// counter regardless of variant so traces replay identically across schemes.
struct SchemeConfig {
  SchemeVariant variant = SchemeVariant::InvalidateOnly;
  uint32_t threshold = 0;
  uint32_t min_sharers = 0;
  uint32_t counter_ceiling = 15;

  static SchemeConfig invalidate_only();
  static SchemeConfig update_only();
  static SchemeConfig with_threshold(uint32_t t);
  static SchemeConfig adapted_moesi();
  static SchemeConfig num_sharers(uint32_t k);

  void validate() const;

  /// Family name without parameter: "inv", "upd", "threshold", "adapted",
  /// "sharers".
  const char* family() const;

  /// Parameter rendered as a decimal string, or "" for parameterless schemes.
  std::string param_string() const;

  /// Canonical grammar form, e.g. "threshold:3".  parse_scheme round-trips it.
  std::string to_string() const;

  bool operator==(const SchemeConfig&) const = default;
};

/// What the deciding cache knows at the instant of a write that must reach the
/// bus.  `writer_state` is the writer's own state for the block (I when the
/// line is absent entirely), `counter` the retained read counter (0 when
/// absent), `remote_sharers` the number of other caches holding a valid copy.
struct WriteContext {
  CoherenceState writer_state = CoherenceState::I;
  uint32_t counter = 0;
  uint32_t remote_sharers = 0;
};

PolicyDecision decide(const SchemeConfig& scheme, const WriteContext& ctx);

/// Parses "inv", "upd", "threshold:<T>", "adapted", or "sharers:<K>".
/// Throws std::invalid_argument on anything else.
SchemeConfig parse_scheme(std::string_view text);

}  // namespace cohsim
