#include <doctest.h>

#include "cohsim/scheme.hpp"

using namespace cohsim;

namespace {

WriteContext ctx(CoherenceState st, uint32_t counter, uint32_t remote) {
  return {st, counter, remote};
}

}  // namespace

TEST_CASE("scheme grammar parses and round-trips") {
  CHECK(parse_scheme("inv") == SchemeConfig::invalidate_only());
  CHECK(parse_scheme("upd") == SchemeConfig::update_only());
  CHECK(parse_scheme("adapted") == SchemeConfig::adapted_moesi());
  CHECK(parse_scheme("threshold:3") == SchemeConfig::with_threshold(3));
  CHECK(parse_scheme("threshold:0") == SchemeConfig::with_threshold(0));
  CHECK(parse_scheme("sharers:2") == SchemeConfig::num_sharers(2));

  for (const char* text :
       {"inv", "upd", "adapted", "threshold:0", "threshold:7", "sharers:16"})
    CHECK(parse_scheme(text).to_string() == text);
}

TEST_CASE("scheme grammar rejects junk") {
  for (const char* text : {"", "invalidate", "Threshold:1", "threshold",
                           "threshold:", "threshold:x", "threshold:-1",
                           "threshold:3x", "sharers", "sharers:", "upd:1",
                           "inv ", " inv", "sharers:two"})
    CHECK_THROWS_AS(parse_scheme(text), std::invalid_argument);
}

TEST_CASE("invalidate-only and update-only are unconditional") {
  const SchemeConfig inv = SchemeConfig::invalidate_only();
  const SchemeConfig upd = SchemeConfig::update_only();
  for (CoherenceState st : {CoherenceState::O, CoherenceState::S, CoherenceState::I})
    for (uint32_t counter : {0u, 1u, 15u})
      for (uint32_t remote : {0u, 1u, 15u}) {
        CHECK(decide(inv, ctx(st, counter, remote)) == PolicyDecision::Invalidate);
        CHECK(decide(upd, ctx(st, counter, remote)) == PolicyDecision::Update);
      }
}

TEST_CASE("threshold compares the counter against T inclusively") {
  const SchemeConfig t2 = SchemeConfig::with_threshold(2);
  CHECK(decide(t2, ctx(CoherenceState::S, 0, 3)) == PolicyDecision::Invalidate);
  CHECK(decide(t2, ctx(CoherenceState::S, 1, 3)) == PolicyDecision::Invalidate);
  // "above or equal" updates
  CHECK(decide(t2, ctx(CoherenceState::S, 2, 3)) == PolicyDecision::Update);
  CHECK(decide(t2, ctx(CoherenceState::S, 3, 3)) == PolicyDecision::Update);
  // the writer state and sharer count are irrelevant to this scheme
  CHECK(decide(t2, ctx(CoherenceState::I, 2, 0)) == PolicyDecision::Update);
  CHECK(decide(t2, ctx(CoherenceState::O, 1, 9)) == PolicyDecision::Invalidate);

  // T=0 always updates, even with a zero counter
  const SchemeConfig t0 = SchemeConfig::with_threshold(0);
  CHECK(decide(t0, ctx(CoherenceState::I, 0, 0)) == PolicyDecision::Update);
}

TEST_CASE("adapted MOESI updates only from the Owned state") {
  const SchemeConfig ad = SchemeConfig::adapted_moesi();
  CHECK(decide(ad, ctx(CoherenceState::O, 0, 1)) == PolicyDecision::Update);
  CHECK(decide(ad, ctx(CoherenceState::S, 15, 7)) == PolicyDecision::Invalidate);
  CHECK(decide(ad, ctx(CoherenceState::I, 15, 7)) == PolicyDecision::Invalidate);
}

TEST_CASE("num-sharers compares remote sharers against K inclusively") {
  const SchemeConfig k2 = SchemeConfig::num_sharers(2);
  CHECK(decide(k2, ctx(CoherenceState::S, 9, 0)) == PolicyDecision::Invalidate);
  CHECK(decide(k2, ctx(CoherenceState::S, 9, 1)) == PolicyDecision::Invalidate);
  CHECK(decide(k2, ctx(CoherenceState::S, 0, 2)) == PolicyDecision::Update);
  CHECK(decide(k2, ctx(CoherenceState::I, 0, 5)) == PolicyDecision::Update);

  const SchemeConfig k0 = SchemeConfig::num_sharers(0);
  CHECK(decide(k0, ctx(CoherenceState::I, 0, 0)) == PolicyDecision::Update);
}

TEST_CASE("scheme labels split into family and parameter") {
  CHECK(std::string(SchemeConfig::invalidate_only().family()) == "inv");
  CHECK(SchemeConfig::invalidate_only().param_string().empty());
  CHECK(std::string(SchemeConfig::with_threshold(3).family()) == "threshold");
  CHECK(SchemeConfig::with_threshold(3).param_string() == "3");
  CHECK(std::string(SchemeConfig::num_sharers(4).family()) == "sharers");
  CHECK(SchemeConfig::num_sharers(4).param_string() == "4");
}
