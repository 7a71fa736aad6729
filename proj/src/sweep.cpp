#include "cohsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "cohsim/engine.hpp"
#include "cohsim/errors.hpp"
#include "cohsim/trace.hpp"

namespace cohsim {

namespace fs = std::filesystem;

void SweepPlan::validate() const {
  if (workloads.empty())
    throw std::invalid_argument("sweep plan has no workloads");
  bool any_generated = false;
  for (const SweepWorkload& w : workloads) any_generated |= !w.external;
  if (any_generated && core_counts.empty())
    throw std::invalid_argument("sweep plan has generated workloads but no core counts");
  for (int c : core_counts)
    if (c < 1 || c > kMaxCores)
      throw std::invalid_argument("sweep core counts must be between 1 and 16");
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");
  CacheGeometry g = geometry;
  g.num_cores = 1;
  g.validate();
  for (const SchemeConfig& s : schemes) s.validate();
}

std::vector<SchemeConfig> default_schemes(int cores) {
  std::vector<SchemeConfig> out = {
      SchemeConfig::invalidate_only(), SchemeConfig::update_only(),
      SchemeConfig::with_threshold(1), SchemeConfig::with_threshold(2),
      SchemeConfig::with_threshold(3), SchemeConfig::adapted_moesi(),
  };
  for (int k = 2; k <= cores; ++k)
    out.push_back(SchemeConfig::num_sharers(static_cast<uint32_t>(k)));
  return out;
}

namespace {

struct Cell {
  std::string workload;
  int cores = 0;
  SchemeConfig scheme;
  std::string trace_path;
  std::string setup_error;  // non-empty: the row fails without running
};

SweepRow make_skeleton(const Cell& cell) {
  SweepRow row;
  row.workload = cell.workload;
  row.cores = cell.cores;
  row.scheme = cell.scheme.family();
  row.param = cell.scheme.param_string();
  return row;
}

void run_cell(const SweepPlan& plan, const Cell& cell, SweepRow& row) {
  try {
    if (!cell.setup_error.empty()) throw InputError(cell.setup_error);
    std::ifstream in(cell.trace_path);
    if (!in) throw InputError("cannot open trace '" + cell.trace_path + "'");
    TraceReader reader(in);
    CacheGeometry geom = plan.geometry;
    geom.num_cores = cell.cores;
    const MetricsTable m = run_trace(reader, geom, cell.scheme, {});
    const CoreCounts t = m.totals();
    row.read_reqs = t.read_reqs;
    row.invalidates = t.invalidates;
    row.updates = t.updates;
    row.total = t.transactions();
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
}

}  // namespace

std::vector<SweepRow> execute(const SweepPlan& plan) {
  plan.validate();

  std::vector<Cell> cells;
  std::unordered_set<std::string> materialized;

  auto expand = [&](const SweepWorkload& w, int cores, const std::string& path,
                    const std::string& setup_error) {
    const std::vector<SchemeConfig> battery =
        plan.schemes.empty() ? default_schemes(cores) : plan.schemes;
    for (const SchemeConfig& scheme : battery)
      cells.push_back({w.name, cores, scheme, path, setup_error});
  };

  for (const SweepWorkload& w : plan.workloads) {
    if (w.external) {
      int cores = 0;
      std::string error;
      try {
        std::ifstream in(w.trace_path);
        if (!in) throw InputError("cannot open trace '" + w.trace_path + "'");
        const std::optional<int> inferred = infer_core_count(in);
        if (!inferred) throw InputError("trace '" + w.trace_path + "' has no records");
        cores = *inferred;
      } catch (const std::exception& e) {
        error = e.what();
      }
      expand(w, cores, w.trace_path, error);
      continue;
    }
    for (int cores : plan.core_counts) {
      std::ostringstream name;
      name << w.name << "_c" << cores << "_r" << plan.num_refs << "_s" << plan.seed
           << ".trace";
      const std::string path = (fs::path(plan.trace_dir) / name.str()).string();
      std::string error;
      if (materialized.insert(path).second) {
        try {
          fs::create_directories(plan.trace_dir);
          std::ofstream out(path);
          if (!out) throw InputError("cannot write trace '" + path + "'");
          WorkloadSpec ws = plan.params;
          ws.kind = w.kind;
          ws.num_cores = cores;
          ws.num_refs = plan.num_refs;
          ws.seed = plan.seed;
          write_trace(ws, out);
          if (!out) throw InputError("failed while writing trace '" + path + "'");
        } catch (const std::exception& e) {
          error = e.what();
          materialized.erase(path);
        }
      }
      expand(w, cores, path, error);
    }
  }

  std::vector<SweepRow> rows(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) rows[i] = make_skeleton(cells[i]);

  const int jobs = static_cast<int>(
      std::min<size_t>(static_cast<size_t>(plan.jobs), cells.size()));
  if (jobs <= 1) {
    for (size_t i = 0; i < cells.size(); ++i) run_cell(plan, cells[i], rows[i]);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          run_cell(plan, cells[i], rows[i]);
      });
    for (std::thread& t : pool) t.join();
  }
  return rows;
}

std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "workload,cores,scheme,param,read_reqs,invalidates,updates,total\n";
  for (const SweepRow& row : rows) {
    if (row.failed) continue;
    out << row.workload << ',' << row.cores << ',' << row.scheme << ',' << row.param
        << ',' << row.read_reqs << ',' << row.invalidates << ',' << row.updates << ','
        << row.total << '\n';
  }
  return out.str();
}

namespace {

std::string trim(std::string_view s) {
  const size_t a = s.find_first_not_of(" \t");
  if (a == std::string_view::npos) return "";
  const size_t b = s.find_last_not_of(" \t");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= value.size()) {
    const size_t comma = value.find(',', pos);
    const std::string item =
        trim(value.substr(pos, comma == std::string::npos ? std::string::npos
                                                          : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

uint64_t parse_u64(const std::string& value, const std::string& key) {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw std::invalid_argument("plan key '" + key + "': bad number '" + value + "'");
  return v;
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("plan key '" + key + "': bad number '" + value + "'");
  }
}

}  // namespace

SweepPlan parse_plan(std::istream& in) {
  SweepPlan plan;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("plan line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key == "workloads") {
      for (const std::string& name : split_list(value)) {
        SweepWorkload w;
        w.kind = parse_workload(name);
        w.name = name;
        plan.workloads.push_back(w);
      }
    } else if (key == "traces") {
      for (const std::string& path : split_list(value)) {
        SweepWorkload w;
        w.external = true;
        w.trace_path = path;
        w.name = fs::path(path).stem().string();
        plan.workloads.push_back(w);
      }
    } else if (key == "cores") {
      plan.core_counts.clear();
      for (const std::string& c : split_list(value))
        plan.core_counts.push_back(static_cast<int>(parse_u64(c, key)));
    } else if (key == "schemes") {
      for (const std::string& s : split_list(value))
        plan.schemes.push_back(parse_scheme(s));
    } else if (key == "refs") {
      plan.num_refs = parse_u64(value, key);
    } else if (key == "seed") {
      plan.seed = parse_u64(value, key);
    } else if (key == "trace-dir") {
      plan.trace_dir = value;
    } else if (key == "jobs") {
      plan.jobs = static_cast<int>(parse_u64(value, key));
    } else if (key == "sets") {
      plan.geometry.num_sets = static_cast<uint32_t>(parse_u64(value, key));
    } else if (key == "ways") {
      plan.geometry.ways = static_cast<uint32_t>(parse_u64(value, key));
    } else if (key == "block-bytes") {
      plan.geometry.block_bytes = static_cast<uint32_t>(parse_u64(value, key));
    } else if (key == "row-length") {
      plan.params.row_length = static_cast<uint32_t>(parse_u64(value, key));
    } else if (key == "private-bytes") {
      plan.params.private_bytes = parse_u64(value, key);
    } else if (key == "public-bytes") {
      plan.params.public_bytes = parse_u64(value, key);
    } else if (key == "slice-bytes") {
      plan.params.slice_bytes = parse_u64(value, key);
    } else if (key == "locks") {
      plan.params.num_locks = static_cast<uint32_t>(parse_u64(value, key));
    } else if (key == "lock-chance") {
      plan.params.lock_step_chance = parse_double(value, key);
    } else {
      throw std::invalid_argument("plan line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  return plan;
}

}  // namespace cohsim
