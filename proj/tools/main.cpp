#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cohsim/engine.hpp"
#include "cohsim/generators.hpp"
#include "cohsim/metrics.hpp"
#include "cohsim/scheme.hpp"
#include "cohsim/sweep.hpp"
#include "cohsim/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitVerification = 4;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cohsim::InputError("cannot open '" + path + "'");
  return in;
}

cohsim::MetricsTable simulate_file(const std::string& path,
                                   const cohsim::CacheGeometry& geom,
                                   const cohsim::SchemeConfig& scheme,
                                   const cohsim::EngineOptions& opts) {
  std::ifstream in = open_input(path);
  cohsim::TraceReader reader(in);
  try {
    return cohsim::run_trace(reader, geom, scheme, opts);
  } catch (const cohsim::TraceParseError& e) {
    throw cohsim::InputError(path + ": " + e.what());
  }
}

int infer_cores(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    // An empty trace still simulates; give it a single core.
    return cohsim::infer_core_count(in).value_or(1);
  } catch (const cohsim::TraceParseError& e) {
    throw cohsim::InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) throw cohsim::InputError("cannot write '" + path + "'");
}

struct GenerateArgs {
  std::string workload;
  std::string out_path;
  int cores = 8;
  uint64_t refs = 5'000'000;
  uint64_t seed = 1;
  cohsim::WorkloadSpec knobs;
};

int do_generate(const GenerateArgs& args) {
  cohsim::WorkloadSpec spec = args.knobs;
  spec.kind = cohsim::parse_workload(args.workload);
  spec.num_cores = args.cores;
  spec.num_refs = args.refs;
  spec.seed = args.seed;

  std::ofstream out(args.out_path);
  if (!out) throw cohsim::InputError("cannot write '" + args.out_path + "'");
  cohsim::write_trace(spec, out);
  if (!out) throw cohsim::InputError("failed while writing '" + args.out_path + "'");
  std::cout << "wrote " << spec.num_refs << " records to " << args.out_path
            << " (workload=" << cohsim::to_string(spec.kind)
            << " cores=" << spec.num_cores << " seed=" << spec.seed << ")\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string trace_path;
  std::string scheme_text;
  std::optional<int> cores;
  bool verify = false;
  std::string report_path;
  std::string format = "json";
  cohsim::CacheGeometry geom;
};

int do_simulate(const SimulateArgs& args) {
  const cohsim::SchemeConfig scheme = cohsim::parse_scheme(args.scheme_text);
  cohsim::CacheGeometry geom = args.geom;
  geom.num_cores = args.cores ? *args.cores : infer_cores(args.trace_path);
  geom.validate();

  cohsim::EngineOptions opts;
  opts.verify = args.verify;
  const cohsim::MetricsTable table =
      simulate_file(args.trace_path, geom, scheme, opts);

  if (!args.report_path.empty()) {
    cohsim::RunInfo info;
    info.scheme = scheme.to_string();
    info.geometry = geom;
    info.trace = args.trace_path;
    info.verify = args.verify;
    write_text_file(args.report_path, args.format == "csv"
                                          ? cohsim::render_csv(table)
                                          : cohsim::render_json(table, info));
  }

  const cohsim::CoreCounts t = table.totals();
  std::cout << "scheme=" << scheme.to_string() << " cores=" << geom.num_cores
            << " refs=" << t.loads + t.stores << " read_reqs=" << t.read_reqs
            << " invalidates=" << t.invalidates << " updates=" << t.updates
            << " writebacks=" << t.writebacks << " total=" << t.transactions()
            << "\n";
  return kExitOk;
}

struct SweepArgs {
  std::string config_path;
  std::vector<std::string> workloads;
  std::vector<std::string> traces;
  std::vector<int> cores;
  std::vector<std::string> schemes;
  std::optional<uint64_t> refs;
  std::optional<uint64_t> seed;
  std::optional<std::string> trace_dir;
  std::optional<int> jobs;
  std::string out_path;
  std::optional<uint32_t> sets;
  std::optional<uint32_t> ways;
  std::optional<uint32_t> block_bytes;
};

int do_sweep(const SweepArgs& args) {
  cohsim::SweepPlan plan;
  if (!args.config_path.empty()) {
    std::ifstream in = open_input(args.config_path);
    plan = cohsim::parse_plan(in);
  }

  if (!args.workloads.empty() || !args.traces.empty()) plan.workloads.clear();
  for (const std::string& name : args.workloads) {
    cohsim::SweepWorkload w;
    w.kind = cohsim::parse_workload(name);
    w.name = name;
    plan.workloads.push_back(w);
  }
  for (const std::string& path : args.traces) {
    cohsim::SweepWorkload w;
    w.external = true;
    w.trace_path = path;
    w.name = std::filesystem::path(path).stem().string();
    plan.workloads.push_back(w);
  }
  if (!args.cores.empty()) plan.core_counts = args.cores;
  if (!args.schemes.empty()) {
    plan.schemes.clear();
    for (const std::string& s : args.schemes)
      plan.schemes.push_back(cohsim::parse_scheme(s));
  }
  if (args.refs) plan.num_refs = *args.refs;
  if (args.seed) plan.seed = *args.seed;
  if (args.trace_dir) plan.trace_dir = *args.trace_dir;
  if (args.jobs) plan.jobs = *args.jobs;
  if (args.sets) plan.geometry.num_sets = *args.sets;
  if (args.ways) plan.geometry.ways = *args.ways;
  if (args.block_bytes) plan.geometry.block_bytes = *args.block_bytes;

  const std::vector<cohsim::SweepRow> rows = cohsim::execute(plan);
  const std::string csv = cohsim::render_sweep_csv(rows);
  if (args.out_path.empty() || args.out_path == "-") {
    std::cout << csv;
  } else {
    write_text_file(args.out_path, csv);
    std::cout << "wrote " << rows.size() << " cells to " << args.out_path << "\n";
  }

  int failures = 0;
  for (const cohsim::SweepRow& row : rows)
    if (row.failed) {
      ++failures;
      std::cerr << "cell failed: workload=" << row.workload << " cores=" << row.cores
                << " scheme=" << row.scheme
                << (row.param.empty() ? "" : ":" + row.param) << ": " << row.error
                << "\n";
    }
  return failures == 0 ? kExitOk : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven multicore cache coherence simulator"};
  app.set_version_flag("--version", "cohsim 0.1.0");
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "Generate a synthetic workload trace");
  gen->add_option("workload", gen_args.workload, "Workload model: locks, arrays, server")
      ->required()
      ->check(CLI::IsMember({"locks", "arrays", "server"}));
  gen->add_option("--out", gen_args.out_path, "Output trace path")->required();
  gen->add_option("--cores", gen_args.cores, "Cores issuing references")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  gen->add_option("--refs", gen_args.refs, "Records to emit")->capture_default_str();
  gen->add_option("--seed", gen_args.seed, "RNG seed")->capture_default_str();
  gen->add_option("--locks", gen_args.knobs.num_locks, "locks: number of lock words")
      ->capture_default_str();
  gen->add_option("--lock-chance", gen_args.knobs.lock_step_chance,
                  "locks: probability a step touches a lock")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->add_option("--private-bytes", gen_args.knobs.private_bytes,
                  "locks: per-core private region size")
      ->capture_default_str();
  gen->add_option("--row-length", gen_args.knobs.row_length,
                  "arrays: elements per row")
      ->capture_default_str();
  gen->add_option("--public-bytes", gen_args.knobs.public_bytes,
                  "server: shared public section size")
      ->capture_default_str();
  gen->add_option("--slice-bytes", gen_args.knobs.slice_bytes,
                  "server: per-client private slice size")
      ->capture_default_str();

  SimulateArgs sim_args;
  int sim_cores = 0;
  CLI::App* sim = app.add_subcommand("simulate", "Replay a trace under one scheme");
  sim->add_option("trace", sim_args.trace_path, "Input trace path")->required();
  sim->add_option("--scheme", sim_args.scheme_text,
                  "inv, upd, threshold:<T>, adapted, or sharers:<K>")
      ->required();
  CLI::Option* sim_cores_opt =
      sim->add_option("--cores", sim_cores, "Core count (default: inferred from the trace)")
          ->check(CLI::Range(1, 16));
  sim->add_flag("--verify", sim_args.verify, "Check protocol invariants while running");
  sim->add_option("--report", sim_args.report_path, "Write the per-core report here ('-' for stdout)");
  sim->add_option("--format", sim_args.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sim->add_option("--sets", sim_args.geom.num_sets, "Sets per cache")->capture_default_str();
  sim->add_option("--ways", sim_args.geom.ways, "Ways per set")->capture_default_str();
  sim->add_option("--block-bytes", sim_args.geom.block_bytes, "Block size in bytes")
      ->capture_default_str();

  SweepArgs sweep_args;
  uint64_t sweep_refs = 0;
  uint64_t sweep_seed = 0;
  std::string sweep_trace_dir;
  int sweep_jobs = 0;
  CLI::App* swp = app.add_subcommand("sweep", "Run a workload x cores x scheme grid");
  swp->add_option("--config", sweep_args.config_path, "Plan file with 'key = value' lines");
  swp->add_option("--workloads", sweep_args.workloads, "Generated workloads (locks,arrays,server)")
      ->delimiter(',');
  swp->add_option("--traces", sweep_args.traces, "External trace files")->delimiter(',');
  swp->add_option("--cores", sweep_args.cores, "Core counts for generated workloads")
      ->delimiter(',')
      ->check(CLI::Range(1, 16));
  swp->add_option("--schemes", sweep_args.schemes,
                  "Schemes to run (default: inv, upd, threshold 1-3, adapted, sharers 2-N)")
      ->delimiter(',');
  CLI::Option* refs_opt = swp->add_option("--refs", sweep_refs, "Records per generated trace");
  CLI::Option* seed_opt = swp->add_option("--seed", sweep_seed, "Trace generation seed");
  CLI::Option* dir_opt =
      swp->add_option("--trace-dir", sweep_trace_dir, "Where generated traces are kept");
  CLI::Option* jobs_opt =
      swp->add_option("--jobs", sweep_jobs, "Worker threads")->check(CLI::Range(1, 256));
  swp->add_option("--out", sweep_args.out_path, "CSV output path (default: stdout)");
  uint32_t sweep_sets = 0;
  uint32_t sweep_ways = 0;
  uint32_t sweep_block = 0;
  CLI::Option* sets_opt = swp->add_option("--sets", sweep_sets, "Sets per cache");
  CLI::Option* ways_opt = swp->add_option("--ways", sweep_ways, "Ways per set");
  CLI::Option* block_opt =
      swp->add_option("--block-bytes", sweep_block, "Block size in bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return do_generate(gen_args);
    if (sim->parsed()) {
      if (sim_cores_opt->count() > 0) sim_args.cores = sim_cores;
      return do_simulate(sim_args);
    }
    if (refs_opt->count() > 0) sweep_args.refs = sweep_refs;
    if (seed_opt->count() > 0) sweep_args.seed = sweep_seed;
    if (dir_opt->count() > 0) sweep_args.trace_dir = sweep_trace_dir;
    if (jobs_opt->count() > 0) sweep_args.jobs = sweep_jobs;
    if (sets_opt->count() > 0) sweep_args.sets = sweep_sets;
    if (ways_opt->count() > 0) sweep_args.ways = sweep_ways;
    if (block_opt->count() > 0) sweep_args.block_bytes = sweep_block;
    return do_sweep(sweep_args);
  } catch (const cohsim::VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kExitVerification;
  } catch (const cohsim::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
