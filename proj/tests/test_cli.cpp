#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "cohsim/trace.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliFixture {
  fs::path dir;

  CliFixture() : dir(fs::temp_directory_path() / "cohsim_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  CmdResult run(const std::string& args) const {
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = std::string(COHSIM_BIN) + " " + args + " >" +
                            out_file.string() + " 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    CmdResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
  }

  fs::path write(const char* name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
  }
};

const char* kHandTrace =
    "# two sharers, then a write\n"
    "L 0 0x40\n"
    "L 1 0x40\n"
    "S 0 0x40\n";

}  // namespace

TEST_CASE("cli: help and version exit cleanly") {
  CliFixture cli;
  CHECK(cli.run("--help").exit_code == 0);
  CHECK(cli.run("simulate --help").exit_code == 0);
  const CmdResult v = cli.run("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("cohsim") != std::string::npos);
}

TEST_CASE("cli: simulate replays a trace and prints the totals") {
  CliFixture cli;
  const fs::path trace = cli.write("hand.trace", kHandTrace);

  const CmdResult inv = cli.run("simulate " + trace.string() + " --scheme inv");
  CHECK(inv.exit_code == 0);
  CHECK(inv.out.find("scheme=inv") != std::string::npos);
  CHECK(inv.out.find("cores=2") != std::string::npos);  // inferred from the trace
  CHECK(inv.out.find("refs=3") != std::string::npos);
  CHECK(inv.out.find("read_reqs=2") != std::string::npos);
  CHECK(inv.out.find("invalidates=1") != std::string::npos);
  CHECK(inv.out.find("updates=0") != std::string::npos);
  CHECK(inv.out.find("total=3") != std::string::npos);

  const CmdResult upd = cli.run("simulate " + trace.string() + " --scheme upd");
  CHECK(upd.exit_code == 0);
  CHECK(upd.out.find("invalidates=0") != std::string::npos);
  CHECK(upd.out.find("updates=1") != std::string::npos);

  const CmdResult wide =
      cli.run("simulate " + trace.string() + " --scheme inv --cores 4");
  CHECK(wide.exit_code == 0);
  CHECK(wide.out.find("cores=4") != std::string::npos);
}

TEST_CASE("cli: simulate writes json and csv reports") {
  CliFixture cli;
  const fs::path trace = cli.write("hand.trace", kHandTrace);
  const fs::path json_path = cli.dir / "report.json";
  const fs::path csv_path = cli.dir / "report.csv";

  const CmdResult r1 = cli.run("simulate " + trace.string() +
                               " --scheme threshold:2 --report " + json_path.string());
  CHECK(r1.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(json_path));
  CHECK(doc["config"]["scheme"] == "threshold:2");
  CHECK(doc["config"]["cores"] == 2);
  CHECK(doc["totals"]["refs"] == 3);
  CHECK(doc["totals"]["read_reqs"] == 2);
  CHECK(doc["totals"]["invalidates"] == 1);
  CHECK(doc["per_core"].size() == 2);

  const CmdResult r2 =
      cli.run("simulate " + trace.string() + " --scheme inv --report " +
              csv_path.string() + " --format csv");
  CHECK(r2.exit_code == 0);
  CHECK(slurp(csv_path) ==
        "core,loads,stores,read_reqs,invalidates,updates,writebacks\n"
        "0,1,1,1,1,0,0\n"
        "1,1,0,1,0,0,0\n"
        "total,2,1,2,1,0,0\n");
}

TEST_CASE("cli: simulate with --verify accepts a clean run") {
  CliFixture cli;
  const fs::path trace = cli.write("hand.trace", kHandTrace);
  const CmdResult r =
      cli.run("simulate " + trace.string() + " --scheme upd --verify");
  CHECK(r.exit_code == 0);
}

TEST_CASE("cli: exit codes distinguish usage, input, and parse failures") {
  CliFixture cli;
  const fs::path trace = cli.write("hand.trace", kHandTrace);

  // usage errors
  CHECK(cli.run("").exit_code == 2);
  CHECK(cli.run("simulate").exit_code == 2);  // missing trace and scheme
  CHECK(cli.run("simulate " + trace.string() + " --scheme warp").exit_code == 2);
  CHECK(cli.run("simulate " + trace.string() + " --scheme threshold:").exit_code == 2);
  CHECK(cli.run("simulate " + trace.string() + " --scheme inv --cores 17").exit_code == 2);
  CHECK(cli.run("generate locks").exit_code == 2);  // missing --out
  CHECK(cli.run("generate web --out x.trace").exit_code == 2);
  CHECK(cli.run("generate locks --cores 17 --out x.trace").exit_code == 2);

  // input errors
  CHECK(cli.run("simulate missing.trace --scheme inv").exit_code == 3);
  const fs::path bad = cli.write("bad.trace", "L 0 0x40\nQ 1 0x40\n");
  const CmdResult r = cli.run("simulate " + bad.string() + " --scheme inv");
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("cli: generate produces a parseable trace of the right size") {
  CliFixture cli;
  const fs::path out = cli.dir / "locks.trace";
  const CmdResult r = cli.run("generate locks --cores 4 --refs 2000 --seed 7 --out " +
                              out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("2000") != std::string::npos);

  std::ifstream in(out);
  REQUIRE(in.good());
  cohsim::TraceReader reader(in);
  size_t n = 0;
  int max_core = 0;
  while (auto ref = reader.next()) {
    ++n;
    max_core = std::max(max_core, ref->core);
  }
  CHECK(n == 2000);
  CHECK(max_core == 3);

  // same spec, same bytes
  const fs::path again = cli.dir / "locks2.trace";
  cli.run("generate locks --cores 4 --refs 2000 --seed 7 --out " + again.string());
  CHECK(slurp(out) == slurp(again));

  // different seed, different trace
  const fs::path reseeded = cli.dir / "locks3.trace";
  cli.run("generate locks --cores 4 --refs 2000 --seed 8 --out " + reseeded.string());
  CHECK(slurp(out) != slurp(reseeded));
}

TEST_CASE("cli: generated traces replay as expected end to end") {
  CliFixture cli;
  const fs::path out = cli.dir / "arrays.trace";
  CHECK(cli.run("generate arrays --cores 2 --refs 5000 --seed 1 --out " +
                out.string())
            .exit_code == 0);
  const CmdResult r = cli.run("simulate " + out.string() + " --scheme inv --verify");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("cores=2") != std::string::npos);
  CHECK(r.out.find("refs=5000") != std::string::npos);
}

TEST_CASE("cli: sweep writes the grid csv") {
  CliFixture cli;
  const fs::path csv = cli.dir / "sweep.csv";
  const fs::path traces = cli.dir / "traces";
  const CmdResult r = cli.run(
      "sweep --workloads locks --cores 2 --schemes inv,upd --refs 1500 --seed 3 "
      "--trace-dir " +
      traces.string() + " --out " + csv.string());
  CHECK(r.exit_code == 0);

  const std::string text = slurp(csv);
  CHECK(text.rfind("workload,cores,scheme,param,read_reqs,invalidates,updates,total\n",
                   0) == 0);
  CHECK(text.find("locks,2,inv,,") != std::string::npos);
  CHECK(text.find("locks,2,upd,,") != std::string::npos);

  // default scheme battery: 7 schemes at 2 cores, plus the header line
  const fs::path csv2 = cli.dir / "sweep2.csv";
  const CmdResult r2 = cli.run("sweep --workloads locks --cores 2 --refs 1500 "
                               "--trace-dir " +
                               traces.string() + " --out " + csv2.string());
  CHECK(r2.exit_code == 0);
  const std::string text2 = slurp(csv2);
  size_t lines = 0;
  for (char c : text2) lines += c == '\n';
  CHECK(lines == 8);
}

TEST_CASE("cli: sweep reads a config file and flags override it") {
  CliFixture cli;
  const fs::path cfg = cli.write("plan.cfg",
                                 "workloads = locks\n"
                                 "cores = 2\n"
                                 "schemes = inv\n"
                                 "refs = 800\n"
                                 "trace-dir = " +
                                     (cli.dir / "t1").string() + "\n");
  const fs::path csv = cli.dir / "out.csv";
  const CmdResult r = cli.run("sweep --config " + cfg.string() + " --schemes upd --out " +
                              csv.string());
  CHECK(r.exit_code == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("locks,2,upd,,") != std::string::npos);
  CHECK(text.find(",inv,") == std::string::npos);

  CHECK(cli.run("sweep --config nowhere.cfg").exit_code == 3);
  const fs::path bad = cli.write("bad.cfg", "wibble = 1\n");
  CHECK(cli.run("sweep --config " + bad.string()).exit_code == 2);
}
