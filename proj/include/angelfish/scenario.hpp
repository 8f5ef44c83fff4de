#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "angelfish/simnet.hpp"

namespace angelfish {

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

const char* rbc_kind_name(RbcKind k);
std::optional<RbcKind> rbc_kind_from_name(const std::string& name);

// One client block handed to a node mid-run; txs synthetic transactions
// are stamped with ids unique to the injection.
struct BlockInjection {
  PartyId node = 0;
  SimTime at = 0;
  uint32_t txs = 1;
};

enum class CheckSet : uint8_t { none, safety, liveness, all };

const char* check_set_name(CheckSet c);
std::optional<CheckSet> check_set_from_name(const std::string& name);

// Everything one batch needs: protocol parameters, network shape, seeds,
// faults, client traffic, stop rule, and output selection. Parsed from a
// strict JSON document (unknown keys are errors, as are out-of-range
// values); defaults fill anything omitted.
struct ScenarioConfig {
  ProtocolConfig protocol;
  SimParams sim;
  std::vector<uint64_t> seeds = {1};
  StopRule stop;
  FaultScript faults;
  std::vector<BlockInjection> blocks;
  CheckSet checks = CheckSet::all;
  std::string out_dir;      // empty: write nothing
  bool emit_trace = false;  // per-seed JSONL trace files under out_dir

  // protocol.timeout_tau, if left 0 in the document, resolves to
  // 2 * sim.delta_cap. stop defaults to min_committed_round 20 with a
  // 100000-tick guard.
  static ScenarioConfig from_json_text(const std::string& text);
  // Resolved round-trippable echo of this config.
  std::string to_json_text() const;
};

// Exact-value histogram: every sample is an integer latency in delay
// units, so buckets are the values themselves.
struct Histogram {
  std::map<int64_t, uint64_t> buckets;
  uint64_t total = 0;

  void add(int64_t value, uint64_t repeat = 1);
  void merge(const Histogram& other);
  // Smallest value carrying the maximum count.
  std::optional<int64_t> mode() const;
  std::optional<int64_t> min() const;
  std::optional<int64_t> max() const;
  double mean() const;
};

struct SeedOutcome {
  uint64_t seed = 0;
  StopReason reason = StopReason::queue_drained;
  SimTime end_time = 0;
  bool livelock = false;
  bool safety_ok = true;
  std::string violation;  // first failed check, empty when clean
  std::vector<Round> rounds_reached;    // per node
  std::vector<Round> committed_rounds;  // per node
};

struct Metrics {
  // Leader vertex creation to first honest direct commit.
  Histogram lv_commit_latency;
  // Non-leader vertex creation to first honest ordering.
  Histogram nlv_commit_latency;
  // Transaction creation (or block hand-off) to first honest ordering.
  Histogram tx_commit_latency;
  std::map<Round, TrafficCounter> traffic_by_round;
  std::map<std::string, TrafficCounter> traffic_by_kind;
  std::vector<SeedOutcome> seeds;
  bool all_safe = true;
  bool any_livelock = false;
};

struct DotRequest {
  PartyId node = 0;
  Round lo = 1;
  Round hi = 1;
};

struct ScenarioResult {
  Metrics metrics;
  // 0 clean, 2 safety violation, 3 liveness flag.
  int exit_code = 0;
  // Offending seed plus the first violation, empty when clean.
  std::string failure;
  // DOT text captured from the first seed when requested.
  std::string dot;
};

// One a_deliver stream entry as the order checkers consume it.
struct DeliveryRecord {
  Round round = 0;
  PartyId source = 0;
  Digest digest{};

  bool operator==(const DeliveryRecord&) const = default;
};

// Pairwise prefix consistency across honest output streams plus
// at-most-once per (round, source) within each stream. Reports the first
// divergence or repeat.
std::optional<std::string> check_total_order(
    const std::vector<std::vector<DeliveryRecord>>& streams);

// Post-run safety oracles over one finished simulation. Each returns the
// first violation found, described with enough trace context to replay.
std::optional<std::string> check_rbc_agreement(const SimNet& net);
std::optional<std::string> check_tc_exclusion(const SimNet& net);
std::optional<std::string> check_integrity(const SimNet& net);
std::optional<std::string> check_delivery_bounds(const SimNet& net);
std::optional<std::string> check_strong_edge_bound(const SimNet& net);
// All of the above plus total order, in a fixed cheap-first sequence.
std::optional<std::string> check_run_safety(const SimNet& net);

// Runs every seed, applies the configured checks, aggregates metrics, and
// writes metrics.json, manifest.json, and optional per-seed traces under
// out_dir. The dot request renders from the first seed's finished DAG.
ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const std::optional<DotRequest>& dot = {});

}  // namespace angelfish
