#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "angelfish/scenario.hpp"

namespace {

using namespace angelfish;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// --dot takes NODE:LO-HI (or NODE:ROUND for a single round).
DotRequest parse_dot_arg(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon == std::string::npos) {
    throw ScenarioError("--dot wants NODE:LO-HI, got \"" + arg + "\"");
  }
  DotRequest req;
  try {
    req.node = static_cast<PartyId>(std::stoul(arg.substr(0, colon)));
    const std::string range = arg.substr(colon + 1);
    const auto dash = range.find('-');
    if (dash == std::string::npos) {
      req.lo = req.hi = std::stoull(range);
    } else {
      req.lo = std::stoull(range.substr(0, dash));
      req.hi = std::stoull(range.substr(dash + 1));
    }
  } catch (const std::exception&) {
    throw ScenarioError("--dot wants NODE:LO-HI, got \"" + arg + "\"");
  }
  if (req.lo < 1 || req.hi < req.lo) {
    throw ScenarioError("--dot round range must satisfy 1 <= LO <= HI");
  }
  return req;
}

void print_histogram_line(const char* label, const Histogram& h) {
  std::printf("  %-18s", label);
  if (h.total == 0) {
    std::printf("no samples\n");
    return;
  }
  std::printf("count %llu  mode %lld  mean %.2f  min %lld  max %lld\n",
              static_cast<unsigned long long>(h.total),
              static_cast<long long>(*h.mode()), h.mean(),
              static_cast<long long>(*h.min()),
              static_cast<long long>(*h.max()));
}

int run(int argc, char** argv) {
  CLI::App app{
      "Deterministic simulator for a DAG-based BFT protocol with "
      "single-leader and multi-leader modes"};

  std::string config_path;
  std::vector<uint64_t> seeds;
  std::string mode, rbc, delay_model, check, faults_path, out_dir, dot_arg;
  std::optional<uint32_t> n, leaders;
  std::optional<double> propose_rate;
  std::optional<SimTime> gst, delta, delta_cap, tau;
  std::optional<Round> rounds;
  bool emit_trace = false;

  app.add_option("--config", config_path, "scenario JSON file");
  app.add_option("--seed", seeds, "run seed, repeatable");
  app.add_option("--n", n, "party count");
  app.add_option("--mode", mode, "single or multi")
      ->check(CLI::IsMember({"single", "multi"}));
  app.add_option("--leaders", leaders, "leaders per round (multi mode)");
  app.add_option("--propose-rate", propose_rate,
                 "probability a non-leader proposes a vertex");
  app.add_option("--rbc", rbc, "broadcast flavor")
      ->check(CLI::IsMember({"bracha", "two_step", "fast_path"}));
  app.add_option("--delay-model", delay_model, "network delay model")
      ->check(CLI::IsMember({"fixed", "jitter", "adversarial"}));
  app.add_option("--gst", gst, "stabilization time");
  app.add_option("--delta", delta, "base network delay");
  app.add_option("--delta-cap", delta_cap, "post-stabilization delay cap");
  app.add_option("--tau", tau, "round timer (defaults to 2x delta cap)");
  app.add_option("--rounds", rounds, "stop once every healthy node commits this round");
  app.add_option("--faults", faults_path, "fault script JSON file");
  app.add_option("--out", out_dir, "directory for metrics/manifest/trace files");
  app.add_flag("--trace", emit_trace, "write per-seed JSONL traces under --out");
  app.add_option("--check", check, "checker set to apply")
      ->check(CLI::IsMember({"none", "safety", "liveness", "all"}));
  app.add_option("--dot", dot_arg, "render NODE:LO-HI of that node's DAG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  ScenarioConfig cfg;
  if (!config_path.empty()) {
    cfg = ScenarioConfig::from_json_text(slurp(config_path));
  } else {
    cfg = ScenarioConfig::from_json_text("{\"n\": 4}");
  }

  if (n) cfg.protocol.n = *n;
  if (!mode.empty()) cfg.sim.multileader = mode == "multi";
  if (leaders) cfg.protocol.leaders_per_round = *leaders;
  if (propose_rate) cfg.protocol.propose_rate = *propose_rate;
  if (!rbc.empty()) cfg.protocol.rbc_kind = *rbc_kind_from_name(rbc);
  if (!delay_model.empty()) {
    cfg.sim.delay_model = *delay_model_from_name(delay_model);
  }
  if (gst) cfg.sim.gst = *gst;
  if (delta) cfg.sim.delta_min = *delta;
  if (delta_cap) cfg.sim.delta_cap = *delta_cap;
  if (delta && !delta_cap && cfg.sim.delta_cap < cfg.sim.delta_min) {
    cfg.sim.delta_cap = 2 * cfg.sim.delta_min;
  }
  if (tau) {
    cfg.protocol.timeout_tau = *tau;
  } else if (delta || delta_cap) {
    cfg.protocol.timeout_tau = 2 * cfg.sim.delta_cap;
  }
  if (rounds) cfg.stop.min_committed_round = *rounds;
  if (!seeds.empty()) cfg.seeds = seeds;
  if (!faults_path.empty()) {
    // Reuse the strict scenario parser on a wrapper document so fault
    // entries get the same validation everywhere.
    nlohmann::json doc;
    doc["n"] = cfg.protocol.n;
    doc["f"] = cfg.protocol.f;
    doc["faults"] = nlohmann::json::parse(slurp(faults_path));
    ScenarioConfig tmp = ScenarioConfig::from_json_text(doc.dump());
    cfg.faults = tmp.faults;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (emit_trace) cfg.emit_trace = true;
  if (!check.empty()) cfg.checks = *check_set_from_name(check);

  cfg.protocol.validate();

  std::optional<DotRequest> dot;
  if (!dot_arg.empty()) dot = parse_dot_arg(dot_arg);

  const ScenarioResult res = run_scenario(cfg, dot);
  const Metrics& m = res.metrics;

  for (const SeedOutcome& s : m.seeds) {
    Round lowest = 0;
    for (size_t i = 0; i < s.committed_rounds.size(); ++i) {
      if (i == 0 || s.committed_rounds[i] < lowest) {
        lowest = s.committed_rounds[i];
      }
    }
    std::printf("seed %llu: %s at t=%lld, lowest committed round %llu%s%s\n",
                static_cast<unsigned long long>(s.seed),
                stop_reason_name(s.reason),
                static_cast<long long>(s.end_time),
                static_cast<unsigned long long>(lowest),
                s.safety_ok ? "" : "  SAFETY VIOLATION: ",
                s.violation.c_str());
  }

  std::printf("latency (delay units):\n");
  print_histogram_line("leader commit", m.lv_commit_latency);
  print_histogram_line("non-leader commit", m.nlv_commit_latency);
  print_histogram_line("transaction", m.tx_commit_latency);

  uint64_t msgs = 0, bytes = 0;
  for (const auto& [k, c] : m.traffic_by_kind) {
    msgs += c.messages;
    bytes += c.bytes;
  }
  std::printf("traffic: %llu messages, %llu payload bytes\n",
              static_cast<unsigned long long>(msgs),
              static_cast<unsigned long long>(bytes));

  if (dot) {
    if (!cfg.out_dir.empty()) {
      std::ostringstream name;
      name << "dag_node" << dot->node << "_r" << dot->lo << "-" << dot->hi
           << ".dot";
      const auto path = std::filesystem::path(cfg.out_dir) / name.str();
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      f << res.dot;
      std::printf("dot written to %s\n", path.string().c_str());
    } else {
      std::fputs(res.dot.c_str(), stdout);
    }
  }

  if (res.exit_code != 0) {
    std::fprintf(stderr, "FAIL: %s\n", res.failure.c_str());
  } else {
    std::printf("all checks passed (%s)\n", check_set_name(cfg.checks));
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
