#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>
#include <string>

#include "cohsim/engine.hpp"
#include "cohsim/generators.hpp"
#include "cohsim/metrics.hpp"
#include "cohsim/scheme.hpp"
#include "cohsim/trace.hpp"
#include "cohsim/types.hpp"

namespace py = pybind11;
using namespace cohsim;

namespace {

CoherenceState state_from(const std::string& text) {
  if (text.size() == 1) {
    switch (text[0]) {
      case 'M': return CoherenceState::M;
      case 'O': return CoherenceState::O;
      case 'E': return CoherenceState::E;
      case 'S': return CoherenceState::S;
      case 'I': return CoherenceState::I;
    }
  }
  throw std::invalid_argument("state must be one of M, O, E, S, I");
}

Op op_from(const std::string& text) {
  if (text == "L" || text == "l") return Op::Load;
  if (text == "S" || text == "s") return Op::Store;
  throw std::invalid_argument("op must be 'L' or 'S'");
}

py::object report_dict(const MetricsTable& m, const RunInfo& info) {
  return py::module_::import("json").attr("loads")(render_json(m, info));
}

py::object txn_dict(const std::optional<BusTransaction>& txn) {
  if (!txn) return py::none();
  py::dict d;
  d["kind"] = to_string(txn->kind);
  d["issuer"] = txn->issuer;
  d["block"] = txn->block;
  return d;
}

CacheGeometry make_geometry(uint32_t sets, uint32_t ways, uint32_t block_bytes,
                            int cores) {
  const CacheGeometry geom{sets, ways, block_bytes, cores};
  geom.validate();
  return geom;
}

MetricsTable simulate_path(const std::string& path, const SchemeConfig& scheme,
                           const CacheGeometry& geom, const EngineOptions& opts) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file: " + path);
  TraceReader reader(in);
  return run_trace(reader, geom, scheme, opts);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trace-driven multicore cache coherence simulator";

  py::register_exception<InputError>(m, "InputError");
  py::register_exception<VerificationError>(m, "VerificationError");

  m.def(
      "parse_scheme",
      [](const std::string& text) { return parse_scheme(text).to_string(); },
      py::arg("text"),
      "Canonical form of a scheme name: inv, upd, threshold:<T>, adapted, "
      "sharers:<K>.");

  m.def(
      "decide",
      [](const std::string& scheme, const std::string& writer_state,
         uint32_t counter, uint32_t remote_sharers) {
        const CoherenceState st = state_from(writer_state);
        if (st == CoherenceState::M || st == CoherenceState::E)
          throw std::invalid_argument(
              "writes from M or E are silent and never reach the policy");
        const PolicyDecision d =
            decide(parse_scheme(scheme), {st, counter, remote_sharers});
        return d == PolicyDecision::Update ? "update" : "invalidate";
      },
      py::arg("scheme"), py::arg("writer_state"), py::arg("counter") = 0,
      py::arg("remote_sharers") = 0,
      "Policy outcome for one bus-visible write: 'invalidate' or 'update'.");

  m.def(
      "block_of",
      [](uint64_t addr, uint32_t sets, uint32_t block_bytes) {
        const CacheGeometry geom = make_geometry(sets, 1, block_bytes, 1);
        const BlockLocation loc = geom.block_of(addr);
        return py::make_tuple(loc.block, loc.set, loc.tag);
      },
      py::arg("addr"), py::kw_only(), py::arg("sets") = 64,
      py::arg("block_bytes") = 64, "(block, set, tag) for a byte address.");

  m.def(
      "generate_trace",
      [](const std::string& workload, const std::string& path, int cores,
         uint64_t refs, uint64_t seed, uint32_t locks, double lock_chance,
         uint64_t private_bytes, uint32_t row_length, uint64_t public_bytes,
         uint64_t slice_bytes) {
        WorkloadSpec spec;
        spec.kind = parse_workload(workload);
        spec.num_cores = cores;
        spec.num_refs = refs;
        spec.seed = seed;
        spec.num_locks = locks;
        spec.lock_step_chance = lock_chance;
        spec.private_bytes = private_bytes;
        spec.row_length = row_length;
        spec.public_bytes = public_bytes;
        spec.slice_bytes = slice_bytes;
        spec.validate();
        std::ofstream out(path);
        if (!out) throw InputError("cannot open output file: " + path);
        py::gil_scoped_release release;
        write_trace(spec, out);
        return refs;
      },
      py::arg("workload"), py::arg("path"), py::kw_only(), py::arg("cores") = 8,
      py::arg("refs") = 5'000'000, py::arg("seed") = 1, py::arg("locks") = 3,
      py::arg("lock_chance") = 0.10, py::arg("private_bytes") = 64 * 1024,
      py::arg("row_length") = 32, py::arg("public_bytes") = 8 * 1024,
      py::arg("slice_bytes") = 1024,
      "Writes a deterministic workload trace; returns the record count.");

  m.def(
      "simulate",
      [](const std::string& path, const std::string& scheme,
         std::optional<int> cores, uint32_t sets, uint32_t ways,
         uint32_t block_bytes, bool verify) {
        const SchemeConfig cfg = parse_scheme(scheme);
        int n = 0;
        if (cores) {
          n = *cores;
        } else {
          std::ifstream probe(path);
          if (!probe) throw InputError("cannot open trace file: " + path);
          n = infer_core_count(probe).value_or(1);
        }
        const CacheGeometry geom = make_geometry(sets, ways, block_bytes, n);
        EngineOptions opts;
        opts.verify = verify;
        MetricsTable table;
        {
          py::gil_scoped_release release;
          table = simulate_path(path, cfg, geom, opts);
        }
        return report_dict(table, {cfg.to_string(), geom, path, verify});
      },
      py::arg("path"), py::arg("scheme"), py::kw_only(),
      py::arg("cores") = py::none(), py::arg("sets") = 64, py::arg("ways") = 4,
      py::arg("block_bytes") = 64, py::arg("verify") = false,
      "Replays a trace file and returns the report as a dict.");

  py::class_<Engine>(m, "Engine",
                     "Stepwise simulator over per-core MOESI caches.")
      .def(py::init([](const std::string& scheme, int cores, uint32_t sets,
                       uint32_t ways, uint32_t block_bytes, bool verify) {
             EngineOptions opts;
             opts.verify = verify;
             return Engine(make_geometry(sets, ways, block_bytes, cores),
                           parse_scheme(scheme), opts);
           }),
           py::arg("scheme"), py::kw_only(), py::arg("cores") = 2,
           py::arg("sets") = 64, py::arg("ways") = 4,
           py::arg("block_bytes") = 64, py::arg("verify") = false)
      .def(
          "step",
          [](Engine& e, const std::string& op, int core, uint64_t addr) {
            return txn_dict(e.step({op_from(op), core, addr}));
          },
          py::arg("op"), py::arg("core"), py::arg("addr"),
          "Applies one reference; returns the bus transaction dict or None.")
      .def(
          "metrics",
          [](const Engine& e) {
            return report_dict(e.metrics(), {e.scheme().to_string(),
                                             e.geometry(), "", false});
          },
          "Per-core and total counters as a dict.")
      .def(
          "line_state",
          [](const Engine& e, int core, uint64_t addr) {
            return to_string(e.line_state(core, addr));
          },
          py::arg("core"), py::arg("addr"))
      .def("line_counter", &Engine::line_counter, py::arg("core"),
           py::arg("addr"))
      .def(
          "check",
          [](const Engine& e) -> py::object {
            const auto v = e.verify_invariants();
            if (!v) return py::none();
            return py::str(v->to_string());
          },
          "Full invariant scan; None when clean, else the violation text.")
      .def_property_readonly(
          "scheme", [](const Engine& e) { return e.scheme().to_string(); })
      .def_property_readonly(
          "cores", [](const Engine& e) { return e.geometry().num_cores; })
      .def_property_readonly("steps", &Engine::steps);
}
