#include "cohsim/generators.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "cohsim/trace.hpp"

namespace cohsim {

WorkloadKind parse_workload(std::string_view name) {
  if (name == "locks") return WorkloadKind::Locks;
  if (name == "arrays") return WorkloadKind::Arrays;
  if (name == "server") return WorkloadKind::PseudoServer;
  throw std::invalid_argument("unknown workload '" + std::string(name) +
                              "' (expected locks, arrays, or server)");
}

const char* to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Locks: return "locks";
    case WorkloadKind::Arrays: return "arrays";
    case WorkloadKind::PseudoServer: return "server";
  }
  return "?";
}

namespace {

// Locks live one per 64-byte block starting at address 0; private regions
// start above them.
constexpr uint64_t kLockStride = 64;
constexpr uint64_t kPrivateBase = 64 * 1024;

std::string format_chance(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

void WorkloadSpec::validate() const {
  if (num_cores < 1 || num_cores > kMaxCores)
    throw std::invalid_argument("workload needs 1-16 cores");
  if (num_locks < 1 || num_locks > kPrivateBase / kLockStride)
    throw std::invalid_argument("num_locks out of range");
  if (lock_step_chance < 0.0 || lock_step_chance > 1.0)
    throw std::invalid_argument("lock_step_chance must be a probability");
  if (private_bytes == 0) throw std::invalid_argument("private_bytes must be positive");
  if (row_length == 0) throw std::invalid_argument("row_length must be positive");
  if (public_bytes == 0) throw std::invalid_argument("public_bytes must be positive");
  if (slice_bytes == 0) throw std::invalid_argument("slice_bytes must be positive");
  if (kind == WorkloadKind::PseudoServer && num_cores < 2)
    throw std::invalid_argument("server workload needs at least 2 cores");
}

TraceGenerator::TraceGenerator(const WorkloadSpec& spec) : spec_(spec), rng_(spec.seed) {
  spec_.validate();
}

std::optional<MemoryRef> TraceGenerator::next() {
  if (emitted_ >= spec_.num_refs) return std::nullopt;
  while (pending_.empty()) {
    scratch_.clear();
    produce(scratch_);
    pending_.insert(pending_.end(), scratch_.begin(), scratch_.end());
  }
  ++emitted_;
  MemoryRef ref = pending_.front();
  pending_.pop_front();
  return ref;
}

std::vector<std::string> TraceGenerator::header() const {
  std::vector<std::string> lines;
  lines.push_back(std::string("workload: ") + cohsim::to_string(spec_.kind));
  lines.push_back("cores: " + std::to_string(spec_.num_cores));
  lines.push_back("refs: " + std::to_string(spec_.num_refs));
  lines.push_back("seed: " + std::to_string(spec_.seed));
  lines.push_back(std::string("rng: ") + Rng::kAlgorithm);
  describe(lines);
  return lines;
}

namespace {

/// Cores spin on a handful of lock words and otherwise work in private
/// buffers with a 2:1 load:store mix.  A lock step is: release if held,
/// otherwise a test load followed by an acquiring store when the lock is
/// free.  Ownership lives in the generator, so emitted traces never show two
/// concurrent holders.
class LocksGenerator final : public TraceGenerator {
 public:
  explicit LocksGenerator(const WorkloadSpec& spec)
      : TraceGenerator(spec), owners_(spec.num_locks, -1) {}

 private:
  static uint64_t lock_addr(uint32_t l) { return l * kLockStride; }

  void produce(std::vector<MemoryRef>& out) override {
    const int core = static_cast<int>(rng_.below(spec_.num_cores));
    if (rng_.chance(spec_.lock_step_chance)) {
      const uint32_t l = static_cast<uint32_t>(rng_.below(spec_.num_locks));
      if (owners_[l] == core) {
        out.push_back({Op::Store, core, lock_addr(l)});
        owners_[l] = -1;
        return;
      }
      out.push_back({Op::Load, core, lock_addr(l)});
      if (owners_[l] < 0) {
        owners_[l] = core;
        out.push_back({Op::Store, core, lock_addr(l)});
      }
      return;
    }
    const uint64_t addr =
        kPrivateBase + core * spec_.private_bytes + rng_.below(spec_.private_bytes);
    out.push_back({rng_.chance(1.0 / 3.0) ? Op::Store : Op::Load, core, addr});
  }

  void describe(std::vector<std::string>& lines) const override {
    lines.push_back("locks: " + std::to_string(spec_.num_locks));
    lines.push_back("lock-chance: " + format_chance(spec_.lock_step_chance));
    lines.push_back("private-bytes: " + std::to_string(spec_.private_bytes));
  }

  std::vector<int> owners_;
};

/// Grid relaxation over one row per core with 4-byte elements: each step
/// loads the cell and its live neighbors (up/down are the adjacent cores'
/// rows), then stores the cell.  Columns advance left to right per core.
class ArraysGenerator final : public TraceGenerator {
 public:
  explicit ArraysGenerator(const WorkloadSpec& spec)
      : TraceGenerator(spec), col_(spec.num_cores, 0) {}

 private:
  uint64_t element(int row, uint32_t j) const {
    return (static_cast<uint64_t>(row) * spec_.row_length + j) * 4;
  }

  void produce(std::vector<MemoryRef>& out) override {
    const int i = static_cast<int>(rng_.below(spec_.num_cores));
    const uint32_t j = col_[i];
    out.push_back({Op::Load, i, element(i, j)});
    if (i > 0) out.push_back({Op::Load, i, element(i - 1, j)});
    if (i + 1 < spec_.num_cores) out.push_back({Op::Load, i, element(i + 1, j)});
    if (j > 0) out.push_back({Op::Load, i, element(i, j - 1)});
    if (j + 1 < spec_.row_length) out.push_back({Op::Load, i, element(i, j + 1)});
    out.push_back({Op::Store, i, element(i, j)});
    col_[i] = (j + 1) % spec_.row_length;
  }

  void describe(std::vector<std::string>& lines) const override {
    lines.push_back("row-length: " + std::to_string(spec_.row_length));
  }

  std::vector<uint32_t> col_;
};

/// Core 0 streams stores over the whole footprint (public section plus every
/// client slice); the other cores read, splitting evenly between the public
/// section and their own slice.
class ServerGenerator final : public TraceGenerator {
 public:
  explicit ServerGenerator(const WorkloadSpec& spec) : TraceGenerator(spec) {}

 private:
  uint64_t slice_base(int core) const {
    return spec_.public_bytes + static_cast<uint64_t>(core - 1) * spec_.slice_bytes;
  }

  uint64_t footprint() const {
    return spec_.public_bytes +
           static_cast<uint64_t>(spec_.num_cores - 1) * spec_.slice_bytes;
  }

  void produce(std::vector<MemoryRef>& out) override {
    const int core = static_cast<int>(rng_.below(spec_.num_cores));
    if (core == 0) {
      out.push_back({Op::Store, 0, rng_.below(footprint())});
      return;
    }
    if (rng_.chance(0.5)) {
      out.push_back({Op::Load, core, rng_.below(spec_.public_bytes)});
    } else {
      out.push_back({Op::Load, core, slice_base(core) + rng_.below(spec_.slice_bytes)});
    }
  }

  void describe(std::vector<std::string>& lines) const override {
    lines.push_back("public-bytes: " + std::to_string(spec_.public_bytes));
    lines.push_back("slice-bytes: " + std::to_string(spec_.slice_bytes));
  }
};

}  // namespace

std::unique_ptr<TraceGenerator> make_generator(const WorkloadSpec& spec) {
  switch (spec.kind) {
    case WorkloadKind::Locks: return std::make_unique<LocksGenerator>(spec);
    case WorkloadKind::Arrays: return std::make_unique<ArraysGenerator>(spec);
    case WorkloadKind::PseudoServer: return std::make_unique<ServerGenerator>(spec);
  }
  throw std::logic_error("unreachable workload kind");
}

void write_trace(const WorkloadSpec& spec, std::ostream& out) {
  auto gen = make_generator(spec);
  TraceWriter writer(out);
  for (const std::string& line : gen->header()) writer.comment(line);
  while (auto ref = gen->next()) writer.write(*ref);
}

}  // namespace cohsim
