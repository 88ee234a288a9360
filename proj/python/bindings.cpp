#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rcl/config.hpp"
#include "rcl/error.hpp"
#include "rcl/experiment.hpp"
#include "rcl/indexing.hpp"
#include "rcl/trace.hpp"

namespace py = pybind11;
using namespace rcl;

namespace {

template <typename T, typename Parse>
T parse_or_throw(const std::string& s, Parse parse, const char* what) {
  const auto v = parse(s);
  if (!v) throw py::value_error(std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

py::dict trial_dict(const TrialRow& r) {
  py::dict d;
  d["trial"] = r.trial;
  d["seed"] = r.seed;
  d["mode"] = std::string(to_string(r.mode));
  d["scenario"] = std::string(to_string(r.scenario));
  d["secret"] = r.secret;
  d["inferred"] = r.inferred;
  d["correct"] = r.correct;
  d["success"] = r.success;
  d["status"] = r.status;
  d["set_size"] = r.set_size;
  d["llc_sets"] = r.llc_sets;
  d["attacker_l1_sets"] = r.attacker_l1_sets;
  d["tests"] = r.tests;
  d["max_purged"] = r.max_purged;
  d["probe_latencies"] = r.probe_latencies;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rclsim, m) {
  m.doc() = "Remapped cache layout simulator";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TraceError>(m, "TraceError", PyExc_ValueError);
  py::register_exception<SimulationFault>(m, "SimulationFault", PyExc_RuntimeError);

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init<>())
      .def_static("parse", [](const std::string& text) { return parse_config(text); }, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("to_text", [](const ExperimentConfig& c) { return to_text(c); })
      .def_property(
          "mode", [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); },
          [](ExperimentConfig& c, const std::string& s) { c.mode = parse_or_throw<Mode>(s, parse_mode, "mode"); })
      .def_property(
          "seed", [](const ExperimentConfig& c) { return c.seed(); },
          [](ExperimentConfig& c, std::uint64_t s) { c.hierarchy.master_seed = s; })
      .def_property(
          "scenario", [](const ExperimentConfig& c) { return std::string(to_string(c.attack.scenario)); },
          [](ExperimentConfig& c, const std::string& s) {
            c.attack.scenario = parse_or_throw<AttackScenario>(s, parse_attack_scenario, "scenario");
          })
      .def_property(
          "trials", [](const ExperimentConfig& c) { return c.attack.trials; },
          [](ExperimentConfig& c, unsigned n) { c.attack.trials = n; })
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; })
      .def("__repr__", [](const ExperimentConfig& c) { return "Config(mode=" + std::string(to_string(c.mode)) + ")"; });

  m.def(
      "generate_trace",
      [](const std::string& kind, std::size_t length, std::uint64_t seed, unsigned code_pages,
         unsigned data_pages) {
        TraceGenOptions o;
        o.kind = parse_or_throw<TraceKind>(kind, parse_trace_kind, "trace kind");
        o.length = length;
        o.seed = seed;
        o.code_pages = code_pages;
        o.data_pages = data_pages;
        return format_trace(generate_trace(o));
      },
      py::arg("kind") = "streaming", py::arg("length") = 4096, py::arg("seed") = 1,
      py::arg("code_pages") = 2, py::arg("data_pages") = 4, "Synthetic trace in the text trace format.");

  m.def(
      "run_trace",
      [](const ExperimentConfig& cfg, const std::string& trace, std::optional<std::string> mode,
         std::optional<unsigned> pt_entries, bool zero_rt, bool check_inclusion) {
        RunOptions o;
        if (mode) o.mode = parse_or_throw<Mode>(*mode, parse_mode, "mode");
        o.pt_entries = pt_entries;
        o.zero_rt = zero_rt;
        o.check_inclusion = check_inclusion;
        const auto events = parse_trace(trace);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_trace(cfg, events, o);
        }
        py::dict d;
        d["total_cycles"] = r.total_cycles;
        d["instructions"] = r.instructions;
        d["mispredictions"] = r.mispredictions;
        d["counters_csv"] = r.counters.to_csv();
        d["events_csv"] = events_csv(r.events);
        std::vector<bool> l1, llc;
        for (const auto& e : r.events) {
          l1.push_back(e.l1_hit);
          llc.push_back(e.llc_hit);
        }
        d["l1_hits"] = l1;
        d["llc_hits"] = llc;
        return d;
      },
      py::arg("config"), py::arg("trace"), py::arg("mode") = py::none(), py::arg("pt_entries") = py::none(),
      py::arg("zero_rt") = false, py::arg("check_inclusion") = false);

  m.def(
      "overhead",
      [](const ExperimentConfig& cfg, const std::string& trace) {
        const auto events = parse_trace(trace);
        py::list out;
        for (const auto& row : overhead_report(cfg, events)) {
          py::dict d;
          d["mode"] = std::string(to_string(row.mode));
          d["total_cycles"] = row.cycles;
          d["overhead_pct"] = row.overhead_pct;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("trace"), "Total cycles of the trace under every mode.");

  m.def(
      "run_attack",
      [](const ExperimentConfig& cfg) {
        std::vector<TrialRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_attack_trials(cfg);
        }
        py::list out;
        for (const auto& r : rows) out.append(trial_dict(r));
        return out;
      },
      py::arg("config"));

  m.def(
      "run_bitmap",
      [](const ExperimentConfig& cfg) {
        const BitmapRun run = run_bitmap(cfg);
        py::dict d;
        d["period"] = run.period;
        d["regenerations"] = run.regenerations;
        d["pbm"] = bitmap_pbm(cfg, run);
        std::vector<std::vector<int>> rows(run.bitmap.lines_per_page(), std::vector<int>(run.bitmap.pages()));
        for (std::size_t l = 0; l < rows.size(); ++l)
          for (std::size_t p = 0; p < run.bitmap.pages(); ++p) rows[l][p] = run.bitmap.at(p, l);
        d["bits"] = rows;
        return d;
      },
      py::arg("config"), "Same-set bitmap; bits[line][page].");

  m.def(
      "random_table",
      [](unsigned set_bits, unsigned rand_bits, std::uint64_t seed) {
        return init_random_table(set_bits, rand_bits, seed).entries();
      },
      py::arg("set_bits"), py::arg("rand_bits"), py::arg("seed"));
  m.def(
      "dump_random_table",
      [](unsigned set_bits, unsigned rand_bits, std::uint64_t seed) {
        return dump_random_table(init_random_table(set_bits, rand_bits, seed));
      },
      py::arg("set_bits"), py::arg("rand_bits"), py::arg("seed"));
  m.def("index_baseline", &index_baseline, py::arg("addr"), py::arg("set_bits"));
  m.def(
      "index_rcl_l1",
      [](Addr va, Addr pa, const std::vector<std::uint32_t>& entries, unsigned set_bits, unsigned rand_bits) {
        return index_rcl_l1(va, pa, RandomTable::from_entries(set_bits, rand_bits, entries)).index;
      },
      py::arg("va"), py::arg("pa"), py::arg("entries"), py::arg("set_bits"), py::arg("rand_bits"));
}
