#include "cohsim/engine.hpp"

#include <bit>
#include <cassert>
#include <cstdio>
#include <map>
#include <set>

#include "cohsim/trace.hpp"

namespace cohsim {

namespace {

std::string hex(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

int SharerDirectory::count(uint64_t block) const {
  return std::popcount(mask(block));
}

int SharerDirectory::count_excluding(uint64_t block, int core) const {
  return std::popcount(static_cast<uint16_t>(mask(block) & ~(1u << core)));
}

void SharerDirectory::remove(uint64_t block, int core) {
  auto it = sharers_.find(block);
  if (it == sharers_.end()) return;
  it->second &= static_cast<uint16_t>(~(1u << core));
  if (it->second == 0) sharers_.erase(it);
}

std::string Violation::to_string() const {
  std::string s = rule + " violated for block 0x" + hex(block);
  if (!holders.empty()) {
    s += " (";
    for (size_t i = 0; i < holders.size(); ++i) {
      if (i) s += ", ";
      s += "core " + std::to_string(holders[i].first) + " in " +
           cohsim::to_string(holders[i].second);
    }
    s += ")";
  }
  if (!detail.empty()) s += ": " + detail;
  return s;
}

Engine::Engine(const CacheGeometry& geom, const SchemeConfig& scheme,
               const EngineOptions& opts)
    : geom_(geom), scheme_(scheme), opts_(opts) {
  geom_.validate();
  scheme_.validate();
  lines_.resize(static_cast<size_t>(geom_.num_cores) * geom_.num_sets * geom_.ways);
  for (size_t i = 0; i < lines_.size(); ++i)
    lines_[i].recency = static_cast<uint32_t>(i % geom_.ways);
  metrics_ = MetricsTable(geom_.num_cores);
}

CacheLine* Engine::find_line(int core, uint32_t set, uint64_t tag) {
  CacheLine* base = &way_ref(core, set, 0);
  for (uint32_t w = 0; w < geom_.ways; ++w)
    if (base[w].resident && base[w].tag == tag) return &base[w];
  return nullptr;
}

const CacheLine* Engine::find_line(int core, uint32_t set, uint64_t tag) const {
  return const_cast<Engine*>(this)->find_line(core, set, tag);
}

void Engine::touch(int core, uint32_t set, CacheLine& line) {
  CacheLine* base = &way_ref(core, set, 0);
  const uint32_t r = line.recency;
  for (uint32_t w = 0; w < geom_.ways; ++w)
    if (base[w].recency < r) ++base[w].recency;
  line.recency = 0;
}

uint32_t Engine::pick_way(int core, uint32_t set) const {
  const CacheLine* base = &way_ref(core, set, 0);
  int stale_invalid = -1;
  uint32_t oldest = 0;
  for (uint32_t w = 0; w < geom_.ways; ++w) {
    const CacheLine& line = base[w];
    if (!line.resident) return w;
    if (!is_valid(line.state) &&
        (stale_invalid < 0 || line.recency > base[stale_invalid].recency))
      stale_invalid = static_cast<int>(w);
    if (line.recency > base[oldest].recency) oldest = w;
  }
  return stale_invalid >= 0 ? static_cast<uint32_t>(stale_invalid) : oldest;
}

void Engine::evict(int core, uint32_t set, CacheLine& line) {
  const uint64_t block = geom_.block_number(set, line.tag);
  if (is_dirty(line.state)) metrics_.record(core, EventKind::Writeback);
  if (is_valid(line.state)) {
    dir_.remove(block, core);
    if (opts_.verify && dir_.mask(block) == 0) memory_version_.erase(block);
  }
  const uint32_t keep_recency = line.recency;  // per-set LRU order stays intact
  line = CacheLine{};
  line.recency = keep_recency;
  evicted_block_ = block;
}

uint64_t Engine::memory_version(uint64_t block) const {
  auto it = memory_version_.find(block);
  return it == memory_version_.end() ? 0 : it->second;
}

void Engine::bump_version(uint64_t block, CacheLine& line) {
  ++stamp_;
  memory_version_[block] = stamp_;
  line.version = stamp_;
}

void Engine::snoop_read(int issuer, const BlockLocation& loc) {
  uint16_t m = dir_.mask(loc.block) & static_cast<uint16_t>(~(1u << issuer));
  while (m) {
    const int c = std::countr_zero(m);
    m &= static_cast<uint16_t>(m - 1);
    CacheLine* line = find_line(c, loc.set, loc.tag);
    assert(line && is_valid(line->state));
    if (line->counter < scheme_.counter_ceiling) ++line->counter;
    if (line->state == CoherenceState::M)
      line->state = CoherenceState::O;
    else if (line->state == CoherenceState::E)
      line->state = CoherenceState::S;
  }
}

void Engine::snoop_invalidate(int issuer, const BlockLocation& loc) {
  uint16_t m = dir_.mask(loc.block) & static_cast<uint16_t>(~(1u << issuer));
  while (m) {
    const int c = std::countr_zero(m);
    m &= static_cast<uint16_t>(m - 1);
    CacheLine* line = find_line(c, loc.set, loc.tag);
    assert(line && is_valid(line->state));
    // The line stays resident so its counter survives for a later refill.
    line->state = CoherenceState::I;
  }
}

void Engine::snoop_update(int issuer, const BlockLocation& loc, uint64_t stamp) {
  uint16_t m = dir_.mask(loc.block) & static_cast<uint16_t>(~(1u << issuer));
  while (m) {
    const int c = std::countr_zero(m);
    m &= static_cast<uint16_t>(m - 1);
    CacheLine* line = find_line(c, loc.set, loc.tag);
    assert(line && is_valid(line->state));
    line->state = CoherenceState::S;
    if (opts_.verify) line->version = stamp;
  }
}

void Engine::check_read_freshness(int core, const BlockLocation& loc,
                                  const CacheLine& line) const {
  const uint64_t latest = memory_version(loc.block);
  if (line.version == latest) return;
  Violation v;
  v.rule = "stale-read";
  v.block = loc.block;
  v.holders = {{core, line.state}};
  v.detail = "core " + std::to_string(core) + " read version " +
             std::to_string(line.version) + " but latest is " + std::to_string(latest);
  throw VerificationError(std::move(v));
}

std::optional<BusTransaction> Engine::local_read(int core, const BlockLocation& loc) {
  CacheLine* line = find_line(core, loc.set, loc.tag);
  if (line && is_valid(line->state)) {
    if (opts_.verify) check_read_freshness(core, loc, *line);
    if (opts_.own_reads_increment_counter && line->counter < scheme_.counter_ceiling)
      ++line->counter;
    touch(core, loc.set, *line);
    return std::nullopt;
  }

  if (!line) {
    CacheLine& slot = way_ref(core, loc.set, pick_way(core, loc.set));
    if (slot.resident) evict(core, loc.set, slot);
    slot.tag = loc.tag;
    slot.resident = true;
    line = &slot;
  }
  snoop_read(core, loc);
  const bool remote_valid = dir_.count_excluding(loc.block, core) > 0;
  line->state = remote_valid ? CoherenceState::S : CoherenceState::E;
  line->counter = 0;
  if (opts_.verify) line->version = memory_version(loc.block);
  touch(core, loc.set, *line);
  dir_.add(loc.block, core);
  return BusTransaction{TxnKind::ReadReq, core, loc.block};
}

std::optional<BusTransaction> Engine::local_write(int core, const BlockLocation& loc) {
  CacheLine* line = find_line(core, loc.set, loc.tag);
  const CoherenceState wstate =
      (line && is_valid(line->state)) ? line->state : CoherenceState::I;

  if (is_exclusive(wstate)) {
    line->state = CoherenceState::M;
    if (opts_.verify) bump_version(loc.block, *line);
    if (line->counter > 0) --line->counter;
    touch(core, loc.set, *line);
    return std::nullopt;
  }

  const WriteContext ctx{wstate, line ? line->counter : 0,
                         static_cast<uint32_t>(dir_.count_excluding(loc.block, core))};
  const PolicyDecision action = decide(scheme_, ctx);

  if (!line) {
    CacheLine& slot = way_ref(core, loc.set, pick_way(core, loc.set));
    if (slot.resident) evict(core, loc.set, slot);
    slot.tag = loc.tag;
    slot.resident = true;
    line = &slot;
  }
  if (wstate == CoherenceState::I) line->counter = 0;  // fill resets the counter

  BusTransaction txn{TxnKind::InvalidateReq, core, loc.block};
  if (action == PolicyDecision::Invalidate) {
    snoop_invalidate(core, loc);
    dir_.isolate(loc.block, core);
    line->state = CoherenceState::M;
    if (opts_.verify) bump_version(loc.block, *line);
  } else {
    txn.kind = TxnKind::UpdateReq;
    if (opts_.verify) bump_version(loc.block, *line);
    snoop_update(core, loc, stamp_);
    line->state =
        ctx.remote_sharers > 0 ? CoherenceState::O : CoherenceState::M;
    dir_.add(loc.block, core);
  }
  if (line->counter > 0) --line->counter;
  touch(core, loc.set, *line);
  return txn;
}

std::optional<BusTransaction> Engine::step(const MemoryRef& ref) {
  if (ref.core < 0 || ref.core >= geom_.num_cores)
    throw InputError("reference core " + std::to_string(ref.core) +
                     " out of range for a " + std::to_string(geom_.num_cores) +
                     "-core run");
  ++steps_;
  evicted_block_.reset();
  const BlockLocation loc = geom_.block_of(ref.addr);
  metrics_.record(ref.core, ref.op == Op::Load ? EventKind::Load : EventKind::Store);
  std::optional<BusTransaction> txn =
      ref.op == Op::Load ? local_read(ref.core, loc) : local_write(ref.core, loc);
  if (txn) metrics_.record(ref.core, txn->kind);

  if (opts_.verify) {
    check_step(loc.block);
    if (opts_.full_check_interval != 0 && steps_ % opts_.full_check_interval == 0)
      if (auto v = verify_invariants()) throw VerificationError(std::move(*v));
  }
  return txn;
}

std::optional<Violation> Engine::check_block(uint64_t block) const {
  const uint32_t set = static_cast<uint32_t>(block % geom_.num_sets);
  const uint64_t tag = block / geom_.num_sets;

  std::vector<std::pair<int, CoherenceState>> holders;
  std::vector<uint64_t> versions;
  uint16_t mask = 0;
  int owners = 0;
  int exclusives = 0;
  for (int c = 0; c < geom_.num_cores; ++c) {
    const CacheLine* line = find_line(c, set, tag);
    if (!line || !is_valid(line->state)) continue;
    holders.emplace_back(c, line->state);
    versions.push_back(line->version);
    mask |= static_cast<uint16_t>(1u << c);
    owners += is_owner(line->state);
    exclusives += is_exclusive(line->state);
  }

  if (owners > 1)
    return Violation{"single-owner", block, holders,
                     std::to_string(owners) + " owning copies"};
  if (exclusives > 0 && holders.size() > 1)
    return Violation{"exclusivity", block, holders,
                     "an M/E copy coexists with other valid copies"};
  if (mask != dir_.mask(block))
    return Violation{"directory-mismatch", block, holders,
                     "directory mask 0x" + hex(dir_.mask(block)) +
                         ", caches hold 0x" + hex(mask)};
  if (opts_.verify) {
    const uint64_t latest = memory_version(block);
    for (size_t i = 0; i < holders.size(); ++i)
      if (versions[i] != latest)
        return Violation{"stale-copy", block, holders,
                         "core " + std::to_string(holders[i].first) +
                             " holds version " + std::to_string(versions[i]) +
                             ", latest is " + std::to_string(latest)};
  }
  return std::nullopt;
}

void Engine::check_step(uint64_t block) {
  if (auto v = check_block(block)) throw VerificationError(std::move(*v));
  if (evicted_block_ && *evicted_block_ != block)
    if (auto v = check_block(*evicted_block_)) throw VerificationError(std::move(*v));
}

std::optional<Violation> Engine::verify_invariants() const {
  std::set<uint64_t> blocks;
  for (int c = 0; c < geom_.num_cores; ++c)
    for (uint32_t s = 0; s < geom_.num_sets; ++s)
      for (uint32_t w = 0; w < geom_.ways; ++w) {
        const CacheLine& line = way_ref(c, s, w);
        if (line.resident && is_valid(line.state))
          blocks.insert(geom_.block_number(s, line.tag));
      }
  for (const auto& entry : dir_.entries()) blocks.insert(entry.first);
  for (uint64_t block : blocks)
    if (auto v = check_block(block)) return v;
  return std::nullopt;
}

CoherenceState Engine::line_state(int core, uint64_t addr) const {
  const BlockLocation loc = geom_.block_of(addr);
  const CacheLine* line = find_line(core, loc.set, loc.tag);
  return (line && is_valid(line->state)) ? line->state : CoherenceState::I;
}

uint32_t Engine::line_counter(int core, uint64_t addr) const {
  const BlockLocation loc = geom_.block_of(addr);
  const CacheLine* line = find_line(core, loc.set, loc.tag);
  return line ? line->counter : 0;
}

const CacheLine& Engine::line_at(int core, uint32_t set, uint32_t way) const {
  if (core < 0 || core >= geom_.num_cores || set >= geom_.num_sets || way >= geom_.ways)
    throw std::out_of_range("line_at: bad cache coordinates");
  return way_ref(core, set, way);
}

void Engine::debug_set_line(int core, uint32_t set, uint32_t way,
                            const CacheLine& line, bool sync_directory) {
  if (core < 0 || core >= geom_.num_cores || set >= geom_.num_sets || way >= geom_.ways)
    throw std::out_of_range("debug_set_line: bad cache coordinates");
  CacheLine& slot = way_ref(core, set, way);
  if (sync_directory) {
    if (slot.resident && is_valid(slot.state))
      dir_.remove(geom_.block_number(set, slot.tag), core);
    if (line.resident && is_valid(line.state))
      dir_.add(geom_.block_number(set, line.tag), core);
  }
  const uint32_t keep_recency = slot.recency;
  slot = line;
  slot.recency = keep_recency;
}

MetricsTable run_source(const std::function<std::optional<MemoryRef>()>& next_ref,
                        const CacheGeometry& geom, const SchemeConfig& scheme,
                        const EngineOptions& opts) {
  Engine engine(geom, scheme, opts);
  while (auto ref = next_ref()) engine.step(*ref);
  if (opts.verify)
    if (auto v = engine.verify_invariants()) throw VerificationError(std::move(*v));
  return engine.metrics();
}

MetricsTable run_trace(TraceReader& reader, const CacheGeometry& geom,
                       const SchemeConfig& scheme, const EngineOptions& opts) {
  return run_source([&reader] { return reader.next(); }, geom, scheme, opts);
}

MetricsTable run_refs(const std::vector<MemoryRef>& refs, const CacheGeometry& geom,
                      const SchemeConfig& scheme, const EngineOptions& opts) {
  size_t i = 0;
  return run_source(
      [&refs, &i]() -> std::optional<MemoryRef> {
        if (i >= refs.size()) return std::nullopt;
        return refs[i++];
      },
      geom, scheme, opts);
}

}  // namespace cohsim
