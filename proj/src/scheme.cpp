#include "cohsim/scheme.hpp"

#include <cassert>
#include <charconv>
#include <stdexcept>

namespace cohsim {

SchemeConfig SchemeConfig::invalidate_only() {
  return {SchemeVariant::InvalidateOnly, 0, 0, 15};
}

SchemeConfig SchemeConfig::update_only() {
  return {SchemeVariant::UpdateOnly, 0, 0, 15};
}

SchemeConfig SchemeConfig::with_threshold(uint32_t t) {
  return {SchemeVariant::Threshold, t, 0, 15};
}

SchemeConfig SchemeConfig::adapted_moesi() {
  return {SchemeVariant::AdaptedMoesi, 0, 0, 15};
}

SchemeConfig SchemeConfig::num_sharers(uint32_t k) {
  return {SchemeVariant::NumSharers, 0, k, 15};
}

void SchemeConfig::validate() const {
  if (counter_ceiling == 0)
    throw std::invalid_argument("counter ceiling must be positive");
}

const char* SchemeConfig::family() const {
  switch (variant) {
    case SchemeVariant::InvalidateOnly: return "inv";
    case SchemeVariant::UpdateOnly: return "upd";
    case SchemeVariant::Threshold: return "threshold";
    case SchemeVariant::AdaptedMoesi: return "adapted";
    case SchemeVariant::NumSharers: return "sharers";
  }
  return "?";
}

std::string SchemeConfig::param_string() const {
  switch (variant) {
    case SchemeVariant::Threshold: return std::to_string(threshold);
    case SchemeVariant::NumSharers: return std::to_string(min_sharers);
    default: return "";
  }
}

std::string SchemeConfig::to_string() const {
  std::string s = family();
  const std::string p = param_string();
  if (!p.empty()) s += ":" + p;
  return s;
}

PolicyDecision decide(const SchemeConfig& scheme, const WriteContext& ctx) {
  // M and E writes never consult the policy: they complete silently.
  assert(ctx.writer_state == CoherenceState::O ||
         ctx.writer_state == CoherenceState::S ||
         ctx.writer_state == CoherenceState::I);
  switch (scheme.variant) {
    case SchemeVariant::InvalidateOnly:
      return PolicyDecision::Invalidate;
    case SchemeVariant::UpdateOnly:
      return PolicyDecision::Update;
    case SchemeVariant::Threshold:
      return ctx.counter >= scheme.threshold ? PolicyDecision::Update
                                             : PolicyDecision::Invalidate;
    case SchemeVariant::AdaptedMoesi:
      return ctx.writer_state == CoherenceState::O ? PolicyDecision::Update
                                                   : PolicyDecision::Invalidate;
    case SchemeVariant::NumSharers:
      return ctx.remote_sharers >= scheme.min_sharers ? PolicyDecision::Update
                                                      : PolicyDecision::Invalidate;
  }
  throw std::logic_error("unreachable scheme variant");
}

namespace {

uint32_t parse_param(std::string_view text, std::string_view whole) {
  uint32_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty())
    throw std::invalid_argument("bad scheme parameter in '" + std::string(whole) + "'");
  return value;
}

}  // namespace

SchemeConfig parse_scheme(std::string_view text) {
  if (text == "inv") return SchemeConfig::invalidate_only();
  if (text == "upd") return SchemeConfig::update_only();
  if (text == "adapted") return SchemeConfig::adapted_moesi();

  const size_t colon = text.find(':');
  if (colon != std::string_view::npos) {
    const std::string_view head = text.substr(0, colon);
    const std::string_view tail = text.substr(colon + 1);
    if (head == "threshold")
      return SchemeConfig::with_threshold(parse_param(tail, text));
    if (head == "sharers")
      return SchemeConfig::num_sharers(parse_param(tail, text));
  }
  throw std::invalid_argument("unknown scheme '" + std::string(text) +
                              "' (expected inv, upd, threshold:<T>, adapted, "
                              "or sharers:<K>)");
}

}  // namespace cohsim
