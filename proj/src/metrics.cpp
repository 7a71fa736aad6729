#include "cohsim/metrics.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cohsim {

CoreCounts& CoreCounts::operator+=(const CoreCounts& o) {
  loads += o.loads;
  stores += o.stores;
  read_reqs += o.read_reqs;
  invalidates += o.invalidates;
  updates += o.updates;
  writebacks += o.writebacks;
  return *this;
}

MetricsTable::MetricsTable(int num_cores) : per_core_(num_cores) {
  if (num_cores < 1 || num_cores > kMaxCores)
    throw std::invalid_argument("metrics table needs 1-16 cores");
}

void MetricsTable::record(int core, EventKind kind) {
  CoreCounts& c = per_core_.at(core);
  switch (kind) {
    case EventKind::Load: ++c.loads; break;
    case EventKind::Store: ++c.stores; break;
    case EventKind::ReadReq: ++c.read_reqs; break;
    case EventKind::InvalidateReq: ++c.invalidates; break;
    case EventKind::UpdateReq: ++c.updates; break;
    case EventKind::Writeback: ++c.writebacks; break;
  }
}

void MetricsTable::record(int core, TxnKind kind) {
  switch (kind) {
    case TxnKind::ReadReq: record(core, EventKind::ReadReq); break;
    case TxnKind::InvalidateReq: record(core, EventKind::InvalidateReq); break;
    case TxnKind::UpdateReq: record(core, EventKind::UpdateReq); break;
  }
}

const CoreCounts& MetricsTable::core(int i) const { return per_core_.at(i); }

CoreCounts MetricsTable::totals() const {
  CoreCounts sum;
  for (const CoreCounts& c : per_core_) sum += c;
  return sum;
}

namespace {

void append_row(std::ostream& out, const std::string& label, const CoreCounts& c) {
  out << label << ',' << c.loads << ',' << c.stores << ',' << c.read_reqs << ','
      << c.invalidates << ',' << c.updates << ',' << c.writebacks << '\n';
}

nlohmann::ordered_json counts_json(const CoreCounts& c) {
  return {
      {"loads", c.loads},           {"stores", c.stores},
      {"read_reqs", c.read_reqs},   {"invalidates", c.invalidates},
      {"updates", c.updates},       {"writebacks", c.writebacks},
  };
}

}  // namespace

std::string render_csv(const MetricsTable& m) {
  std::ostringstream out;
  out << "core,loads,stores,read_reqs,invalidates,updates,writebacks\n";
  for (int i = 0; i < m.num_cores(); ++i)
    append_row(out, std::to_string(i), m.core(i));
  append_row(out, "total", m.totals());
  return out.str();
}

std::string render_json(const MetricsTable& m, const RunInfo& info) {
  nlohmann::ordered_json doc;
  doc["config"] = {
      {"scheme", info.scheme},
      {"cores", info.geometry.num_cores},
      {"sets", info.geometry.num_sets},
      {"ways", info.geometry.ways},
      {"block_bytes", info.geometry.block_bytes},
      {"trace", info.trace},
      {"verify", info.verify},
  };
  nlohmann::ordered_json per_core = nlohmann::ordered_json::array();
  for (int i = 0; i < m.num_cores(); ++i) {
    nlohmann::ordered_json row;
    row["core"] = i;
    row.update(counts_json(m.core(i)));
    per_core.push_back(std::move(row));
  }
  doc["per_core"] = std::move(per_core);
  const CoreCounts t = m.totals();
  doc["totals"] = counts_json(t);
  doc["totals"]["refs"] = t.loads + t.stores;
  doc["totals"]["transactions"] = t.transactions();
  return doc.dump(2) + "\n";
}

}  // namespace cohsim
