// Python bindings for the scenario-level operations: run a batch from a
// JSON document, echo a strictly parsed config with defaults resolved,
// query the leader schedule, and render a DAG window as Graphviz DOT.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>

#include "angelfish/scenario.hpp"

namespace py = pybind11;
using namespace angelfish;

namespace {

py::dict hist_dict(const Histogram& h) {
  py::dict d;
  for (const auto& [value, count] : h.buckets) {
    d[py::int_(value)] = py::int_(count);
  }
  return d;
}

py::dict result_dict(const ScenarioResult& res) {
  py::dict out;
  out["exit_code"] = res.exit_code;
  out["failure"] = res.failure;
  out["all_safe"] = res.metrics.all_safe;
  out["any_livelock"] = res.metrics.any_livelock;
  out["lv_commit_latency"] = hist_dict(res.metrics.lv_commit_latency);
  out["nlv_commit_latency"] = hist_dict(res.metrics.nlv_commit_latency);
  out["tx_commit_latency"] = hist_dict(res.metrics.tx_commit_latency);
  py::list seeds;
  for (const SeedOutcome& s : res.metrics.seeds) {
    py::dict sd;
    sd["seed"] = s.seed;
    sd["stop"] = std::string(stop_reason_name(s.reason));
    sd["end_time"] = s.end_time;
    sd["livelock"] = s.livelock;
    sd["safety_ok"] = s.safety_ok;
    sd["violation"] = s.violation;
    sd["rounds_reached"] = s.rounds_reached;
    sd["committed_rounds"] = s.committed_rounds;
    seeds.append(sd);
  }
  out["seeds"] = seeds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Certified-DAG BFT consensus engine with a deterministic "
      "partial-synchrony simulator";

  py::register_exception<ScenarioError>(m, "ScenarioError");

  m.def(
      "run",
      [](const std::string& config_json) {
        const ScenarioConfig cfg = ScenarioConfig::from_json_text(config_json);
        return result_dict(run_scenario(cfg));
      },
      py::arg("config_json"),
      "Run every seed of a JSON scenario document, apply the configured "
      "safety and liveness checks, and return aggregated metrics. "
      "exit_code is 0 when clean, 2 on a safety violation, 3 on a "
      "liveness flag.");

  m.def(
      "resolve_config",
      [](const std::string& config_json) {
        return ScenarioConfig::from_json_text(config_json).to_json_text();
      },
      py::arg("config_json"),
      "Strictly parse a scenario document (unknown keys are errors) and "
      "echo it back with every default resolved.");

  m.def(
      "leaders",
      [](Round round, uint32_t n, uint32_t leaders_per_round,
         uint64_t schedule_seed) {
        if (round < 1) throw std::invalid_argument("rounds start at 1");
        ProtocolConfig pc;
        pc.n = n;
        pc.f = n >= 1 ? (n - 1) / 3 : 0;
        pc.leaders_per_round = leaders_per_round;
        pc.leader_schedule_seed = schedule_seed;
        pc.validate();
        return multiple_leaders_of(round, pc);
      },
      py::arg("round"), py::arg("n"), py::arg("leaders_per_round") = 1,
      py::arg("schedule_seed") = 0,
      "Ordered leader list for a round under the deterministic schedule.");

  m.def(
      "export_dot",
      [](const std::string& config_json, PartyId node, Round lo, Round hi) {
        const ScenarioConfig cfg = ScenarioConfig::from_json_text(config_json);
        const DotRequest req{node, lo, hi};
        return run_scenario(cfg, req).dot;
      },
      py::arg("config_json"), py::arg("node") = 0, py::arg("lo") = 1,
      py::arg("hi") = 1,
      "Run the first seed of a scenario and render rounds [lo, hi] of the "
      "chosen node's DAG as Graphviz DOT.");
}
