#include "angelfish/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace angelfish {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what) { throw ScenarioError(what); }

void expect_keys(const json& obj, const char* where,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(std::string("unknown key \"") + it.key() + "\" in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return it->get<T>();
}

// Injected transactions set bit 39 so latency accounting can tell them
// apart from node-synthesized payload (which counts up from zero).
uint64_t injected_tx_id(PartyId node, uint32_t injection, uint32_t tx) {
  return (uint64_t{node} << 40) | (1ull << 39) |
         (uint64_t{injection} << 8) | tx;
}

bool is_injected_tx(uint64_t id) { return (id >> 39) & 1; }

}  // namespace

const char* rbc_kind_name(RbcKind k) {
  switch (k) {
    case RbcKind::bracha: return "bracha";
    case RbcKind::two_step_certified: return "two_step";
    case RbcKind::fast_path: return "fast_path";
  }
  return "?";
}

std::optional<RbcKind> rbc_kind_from_name(const std::string& name) {
  if (name == "bracha") return RbcKind::bracha;
  if (name == "two_step") return RbcKind::two_step_certified;
  if (name == "fast_path") return RbcKind::fast_path;
  return std::nullopt;
}

const char* check_set_name(CheckSet c) {
  switch (c) {
    case CheckSet::none: return "none";
    case CheckSet::safety: return "safety";
    case CheckSet::liveness: return "liveness";
    case CheckSet::all: return "all";
  }
  return "?";
}

std::optional<CheckSet> check_set_from_name(const std::string& name) {
  if (name == "none") return CheckSet::none;
  if (name == "safety") return CheckSet::safety;
  if (name == "liveness") return CheckSet::liveness;
  if (name == "all") return CheckSet::all;
  return std::nullopt;
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config root must be a JSON object");
  expect_keys(doc, "config",
              {"n", "f", "timeout_tau", "rbc", "leader_seed",
               "leaders_per_round", "propose_rate", "mode", "delay_model",
               "delta", "delta_cap", "gst", "seeds", "txs_per_vertex", "stop",
               "faults", "blocks", "checks", "out_dir", "emit_trace"});

  ScenarioConfig cfg;
  try {
    if (!doc.contains("n")) fail("config requires \"n\"");
    cfg.protocol.n = doc.at("n").get<uint32_t>();
    cfg.protocol.f = get_or<uint32_t>(doc, "f", (cfg.protocol.n - 1) / 3);

    const std::string rbc = get_or<std::string>(doc, "rbc", "fast_path");
    if (auto k = rbc_kind_from_name(rbc)) {
      cfg.protocol.rbc_kind = *k;
    } else {
      fail("unknown rbc \"" + rbc + "\" (bracha, two_step, fast_path)");
    }
    cfg.protocol.leader_schedule_seed = get_or<uint64_t>(doc, "leader_seed", 0);
    cfg.protocol.leaders_per_round =
        get_or<uint32_t>(doc, "leaders_per_round", 1);
    cfg.protocol.propose_rate = get_or<double>(doc, "propose_rate", 1.0);

    const std::string mode = get_or<std::string>(doc, "mode", "single");
    if (mode == "single") {
      cfg.sim.multileader = false;
    } else if (mode == "multi") {
      cfg.sim.multileader = true;
    } else {
      fail("unknown mode \"" + mode + "\" (single, multi)");
    }

    const std::string dm = get_or<std::string>(doc, "delay_model", "fixed");
    if (auto d = delay_model_from_name(dm)) {
      cfg.sim.delay_model = *d;
    } else {
      fail("unknown delay_model \"" + dm +
           "\" (fixed, jitter, adversarial)");
    }
    cfg.sim.delta_min = get_or<SimTime>(doc, "delta", 1);
    cfg.sim.delta_cap = get_or<SimTime>(doc, "delta_cap", 2);
    cfg.sim.gst = get_or<SimTime>(doc, "gst", 0);
    cfg.sim.txs_per_vertex = get_or<uint32_t>(doc, "txs_per_vertex", 1);
    if (cfg.sim.delta_min < 1) fail("delta must be at least 1");
    if (cfg.sim.delta_cap < cfg.sim.delta_min) {
      fail("delta_cap must be at least delta");
    }
    if (cfg.sim.gst < 0) fail("gst must be nonnegative");

    cfg.protocol.timeout_tau =
        get_or<SimTime>(doc, "timeout_tau", 2 * cfg.sim.delta_cap);

    if (doc.contains("seeds")) {
      cfg.seeds = doc.at("seeds").get<std::vector<uint64_t>>();
      if (cfg.seeds.empty()) fail("seeds must be nonempty");
    }

    if (doc.contains("stop")) {
      const json& stop = doc.at("stop");
      expect_keys(stop, "stop", {"max_time", "min_committed_round"});
      if (stop.contains("max_time")) {
        cfg.stop.max_time = stop.at("max_time").get<SimTime>();
      }
      if (stop.contains("min_committed_round")) {
        cfg.stop.min_committed_round =
            stop.at("min_committed_round").get<Round>();
      }
      if (!cfg.stop.max_time && !cfg.stop.min_committed_round) {
        fail("stop requires max_time or min_committed_round");
      }
    } else {
      cfg.stop.max_time = 100000;
      cfg.stop.min_committed_round = 20;
    }

    if (doc.contains("faults")) {
      const json& faults = doc.at("faults");
      expect_keys(faults, "faults", {"crashes", "byzantine"});
      for (const json& c : get_or<json>(faults, "crashes", json::array())) {
        expect_keys(c, "crashes entry", {"party", "at"});
        const PartyId party = c.at("party").get<PartyId>();
        if (party >= cfg.protocol.n) fail("crash party out of range");
        cfg.faults.crashes[party] = c.at("at").get<SimTime>();
      }
      for (const json& b : get_or<json>(faults, "byzantine", json::array())) {
        expect_keys(b, "byzantine entry", {"party", "behavior"});
        const PartyId party = b.at("party").get<PartyId>();
        if (party >= cfg.protocol.n) fail("byzantine party out of range");
        const std::string name = b.at("behavior").get<std::string>();
        if (auto bb = byz_behavior_from_name(name)) {
          cfg.faults.byzantine[party] = *bb;
        } else {
          fail("unknown byzantine behavior \"" + name + "\"");
        }
      }
      if (cfg.faults.fault_count() > cfg.protocol.f) {
        fail("fault script names more than f distinct parties");
      }
    }

    for (const json& b : get_or<json>(doc, "blocks", json::array())) {
      expect_keys(b, "blocks entry", {"node", "at", "txs"});
      BlockInjection inj;
      inj.node = b.at("node").get<PartyId>();
      if (inj.node >= cfg.protocol.n) fail("block node out of range");
      inj.at = b.at("at").get<SimTime>();
      inj.txs = get_or<uint32_t>(b, "txs", 1);
      cfg.blocks.push_back(inj);
    }

    const std::string checks = get_or<std::string>(doc, "checks", "all");
    if (auto c = check_set_from_name(checks)) {
      cfg.checks = *c;
    } else {
      fail("unknown checks \"" + checks + "\" (none, safety, liveness, all)");
    }
    cfg.out_dir = get_or<std::string>(doc, "out_dir", "");
    cfg.emit_trace = get_or<bool>(doc, "emit_trace", false);
  } catch (const json::exception& e) {
    fail(std::string("config field has the wrong type: ") + e.what());
  }

  cfg.protocol.validate();
  return cfg;
}

std::string ScenarioConfig::to_json_text() const {
  ordered_json doc;
  doc["n"] = protocol.n;
  doc["f"] = protocol.f;
  doc["timeout_tau"] = protocol.timeout_tau;
  doc["rbc"] = rbc_kind_name(protocol.rbc_kind);
  doc["leader_seed"] = protocol.leader_schedule_seed;
  doc["leaders_per_round"] = protocol.leaders_per_round;
  doc["propose_rate"] = protocol.propose_rate;
  doc["mode"] = sim.multileader ? "multi" : "single";
  doc["delay_model"] = delay_model_name(sim.delay_model);
  doc["delta"] = sim.delta_min;
  doc["delta_cap"] = sim.delta_cap;
  doc["gst"] = sim.gst;
  doc["seeds"] = seeds;
  doc["txs_per_vertex"] = sim.txs_per_vertex;
  ordered_json stop_doc = ordered_json::object();
  if (stop.max_time) stop_doc["max_time"] = *stop.max_time;
  if (stop.min_committed_round) {
    stop_doc["min_committed_round"] = *stop.min_committed_round;
  }
  doc["stop"] = stop_doc;
  ordered_json crashes = ordered_json::array();
  for (const auto& [party, at] : faults.crashes) {
    crashes.push_back({{"party", party}, {"at", at}});
  }
  ordered_json byz = ordered_json::array();
  for (const auto& [party, b] : faults.byzantine) {
    byz.push_back({{"party", party}, {"behavior", byz_behavior_name(b)}});
  }
  doc["faults"] = {{"crashes", crashes}, {"byzantine", byz}};
  ordered_json blocks_doc = ordered_json::array();
  for (const BlockInjection& b : blocks) {
    blocks_doc.push_back({{"node", b.node}, {"at", b.at}, {"txs", b.txs}});
  }
  doc["blocks"] = blocks_doc;
  doc["checks"] = check_set_name(checks);
  doc["out_dir"] = out_dir;
  doc["emit_trace"] = emit_trace;
  return doc.dump(2);
}

void Histogram::add(int64_t value, uint64_t repeat) {
  if (repeat == 0) return;
  buckets[value] += repeat;
  total += repeat;
}

void Histogram::merge(const Histogram& other) {
  for (const auto& [v, c] : other.buckets) add(v, c);
}

std::optional<int64_t> Histogram::mode() const {
  std::optional<int64_t> best;
  uint64_t best_count = 0;
  for (const auto& [v, c] : buckets) {
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

std::optional<int64_t> Histogram::min() const {
  if (buckets.empty()) return std::nullopt;
  return buckets.begin()->first;
}

std::optional<int64_t> Histogram::max() const {
  if (buckets.empty()) return std::nullopt;
  return buckets.rbegin()->first;
}

double Histogram::mean() const {
  if (total == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [v, c] : buckets) sum += double(v) * double(c);
  return sum / double(total);
}

namespace {

std::string delivery_str(const DeliveryRecord& d) {
  std::ostringstream os;
  os << "(round " << d.round << ", source " << d.source << ", "
     << d.digest.hex().substr(0, 8) << ")";
  return os.str();
}

bool honest(const SimNet& net, PartyId i) {
  return net.script().byzantine.count(i) == 0;
}

PartyId main_leader(const SimNet& net, Round r) {
  return leader_of(r, net.config());
}

}  // namespace

std::optional<std::string> check_total_order(
    const std::vector<std::vector<DeliveryRecord>>& streams) {
  for (size_t i = 0; i < streams.size(); ++i) {
    std::set<std::pair<Round, PartyId>> seen;
    for (size_t k = 0; k < streams[i].size(); ++k) {
      const DeliveryRecord& d = streams[i][k];
      if (!seen.insert({d.round, d.source}).second) {
        std::ostringstream os;
        os << "stream " << i << " delivers " << delivery_str(d)
           << " twice, second time at index " << k;
        return os.str();
      }
    }
  }
  for (size_t i = 0; i < streams.size(); ++i) {
    for (size_t j = i + 1; j < streams.size(); ++j) {
      const size_t common = std::min(streams[i].size(), streams[j].size());
      for (size_t k = 0; k < common; ++k) {
        if (!(streams[i][k] == streams[j][k])) {
          std::ostringstream os;
          os << "streams " << i << " and " << j << " diverge at index " << k
             << ": " << delivery_str(streams[i][k]) << " vs "
             << delivery_str(streams[j][k]);
          return os.str();
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_rbc_agreement(const SimNet& net) {
  std::map<std::pair<Round, int64_t>, std::pair<Digest, PartyId>> first;
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind != TraceKind::rbc_deliver || !honest(net, rec.node)) continue;
    const auto key = std::make_pair(rec.round, rec.peer);
    auto [it, fresh] = first.emplace(key, std::make_pair(rec.digest, rec.node));
    if (!fresh && it->second.first != rec.digest) {
      std::ostringstream os;
      os << "rbc agreement: instance (origin " << rec.peer << ", round "
         << rec.round << ") delivered " << it->second.first.hex().substr(0, 8)
         << " at node " << it->second.second << " but "
         << rec.digest.hex().substr(0, 8) << " at node " << rec.node;
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_tc_exclusion(const SimNet& net) {
  std::map<Round, std::set<PartyId>> timeout_senders;
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind == TraceKind::timeout_sent) {
      timeout_senders[rec.round].insert(rec.node);
    }
  }
  const uint32_t quorum = net.config().quorum();
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind != TraceKind::direct_commit) continue;
    // Secondary leaders commit independently of the round timer; only the
    // first listed leader's vertex is mutually exclusive with timeouts.
    if (rec.peer != main_leader(net, rec.round)) continue;
    auto it = timeout_senders.find(rec.round);
    if (it != timeout_senders.end() && it->second.size() >= quorum) {
      std::ostringstream os;
      os << "tc exclusion: node " << rec.node
         << " directly committed the round " << rec.round
         << " leader vertex while " << it->second.size()
         << " parties sent timeouts for that round";
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_integrity(const SimNet& net) {
  std::map<PartyId, std::set<Digest>> seen;
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind == TraceKind::rbc_deliver ||
        rec.kind == TraceKind::vertex_created) {
      seen[rec.node].insert(rec.digest);
    }
  }
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind != TraceKind::a_deliver || !honest(net, rec.node)) continue;
    if (!seen[rec.node].count(rec.digest)) {
      std::ostringstream os;
      os << "integrity: node " << rec.node << " ordered vertex "
         << rec.digest.hex().substr(0, 8) << " (round " << rec.round
         << ", source " << rec.peer
         << ") that reliable broadcast never handed it";
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_delivery_bounds(const SimNet& net) {
  const SimTime cap = net.params().delta_cap;
  const SimTime gst = net.params().gst;
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind != TraceKind::send) continue;
    const SimTime delay = static_cast<SimTime>(rec.b >> 8);
    if (rec.time >= gst && delay > cap) {
      std::ostringstream os;
      os << "delivery bound: send at t=" << rec.time << " (node " << rec.node
         << " to " << rec.peer << ") drew delay " << delay
         << " beyond the post-stabilization cap " << cap;
      return os.str();
    }
    if (rec.time < gst && rec.time + delay > gst + cap) {
      std::ostringstream os;
      os << "delivery bound: send at t=" << rec.time << " (node " << rec.node
         << " to " << rec.peer << ") arrives at " << rec.time + delay
         << ", past the stabilization horizon " << gst + cap;
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_strong_edge_bound(const SimNet& net) {
  const uint32_t f = net.config().f;
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind != TraceKind::vertex_created || !honest(net, rec.node)) {
      continue;
    }
    if (rec.peer != 1) continue;  // jumped entries owe no minimum
    const uint64_t bound = rec.a > f ? rec.a - f : 0;
    if (rec.b < bound) {
      std::ostringstream os;
      os << "strong edge bound: node " << rec.node << " created its round "
         << rec.round << " vertex over " << rec.b
         << " previous-round vertices, below the " << bound
         << " announced proposers minus f";
      return os.str();
    }
    if (!net.params().multileader && rec.round >= 2) {
      const Vertex* v = net.node(rec.node).dag().get_by_id(rec.digest);
      if (v == nullptr) continue;
      const uint64_t excl =
          net.node(rec.node).sent_timeout(rec.round - 1) ? 1 : 0;
      const uint64_t floor_edges = bound > excl ? bound - excl : 0;
      if (v->strong_edges.size() < floor_edges) {
        std::ostringstream os;
        os << "strong edge bound: node " << rec.node << " round " << rec.round
           << " vertex carries " << v->strong_edges.size()
           << " strong edges, below " << floor_edges
           << " (bound " << bound << " less the timed-out leader)";
        return os.str();
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_run_safety(const SimNet& net) {
  if (auto v = check_integrity(net)) return v;
  if (auto v = check_rbc_agreement(net)) return v;

  std::vector<std::vector<DeliveryRecord>> streams;
  std::vector<PartyId> stream_owner;
  for (PartyId i = 0; i < net.node_count(); ++i) {
    if (honest(net, i)) {
      streams.emplace_back();
      stream_owner.push_back(i);
    }
  }
  for (const TraceRecord& rec : net.trace()) {
    if (rec.kind != TraceKind::a_deliver) continue;
    for (size_t s = 0; s < stream_owner.size(); ++s) {
      if (stream_owner[s] == rec.node) {
        streams[s].push_back(
            {rec.round, static_cast<PartyId>(rec.peer), rec.digest});
        break;
      }
    }
  }
  if (auto v = check_total_order(streams)) {
    std::ostringstream os;
    os << "total order (streams are honest nodes";
    for (PartyId p : stream_owner) os << " " << p;
    os << "): " << *v;
    return os.str();
  }

  if (auto v = check_tc_exclusion(net)) return v;
  if (auto v = check_strong_edge_bound(net)) return v;
  if (auto v = check_delivery_bounds(net)) return v;
  return std::nullopt;
}

namespace {

void accumulate_metrics(Metrics& m, const SimNet& net) {
  for (const auto& [r, c] : net.traffic_by_round()) {
    m.traffic_by_round[r].messages += c.messages;
    m.traffic_by_round[r].bytes += c.bytes;
  }
  for (const auto& [k, c] : net.traffic_by_kind()) {
    auto& slot = m.traffic_by_kind[wire_kind_name(k)];
    slot.messages += c.messages;
    slot.bytes += c.bytes;
  }

  struct Created {
    SimTime time = 0;
    PartyId node = 0;
    Round round = 0;
  };
  std::map<Digest, Created> created;
  std::map<Digest, SimTime> first_direct;
  struct Ordered {
    SimTime time = 0;
    uint64_t txs = 0;
    uint64_t first_tx = 0;
  };
  std::map<Digest, Ordered> first_ordered;
  std::map<uint64_t, SimTime> submitted;

  for (const TraceRecord& rec : net.trace()) {
    switch (rec.kind) {
      case TraceKind::vertex_created:
        created.emplace(rec.digest, Created{rec.time, rec.node, rec.round});
        break;
      case TraceKind::direct_commit:
        if (honest(net, rec.node)) {
          auto [it, fresh] = first_direct.emplace(rec.digest, rec.time);
          if (!fresh && rec.time < it->second) it->second = rec.time;
        }
        break;
      case TraceKind::a_deliver:
        if (honest(net, rec.node)) {
          auto [it, fresh] = first_ordered.emplace(
              rec.digest, Ordered{rec.time, rec.a, rec.b});
          if (!fresh && rec.time < it->second.time) {
            it->second = Ordered{rec.time, rec.a, rec.b};
          }
        }
        break;
      case TraceKind::block_submitted:
        submitted.emplace(rec.b, rec.time);
        break;
      default:
        break;
    }
  }

  const ProtocolConfig& cfg = net.config();
  for (const auto& [digest, c] : created) {
    bool is_leader_vertex;
    if (net.params().multileader) {
      const auto& listed = multiple_leaders_of(c.round, cfg);
      is_leader_vertex =
          std::find(listed.begin(), listed.end(), c.node) != listed.end();
    } else {
      is_leader_vertex = leader_of(c.round, cfg) == c.node;
    }

    if (is_leader_vertex) {
      auto it = first_direct.find(digest);
      if (it != first_direct.end()) {
        m.lv_commit_latency.add(it->second - c.time);
      }
    }
    auto ord = first_ordered.find(digest);
    if (ord == first_ordered.end()) continue;
    if (!is_leader_vertex) {
      m.nlv_commit_latency.add(ord->second.time - c.time);
    }
    if (ord->second.txs > 0) {
      SimTime born = c.time;
      if (is_injected_tx(ord->second.first_tx)) {
        auto sub = submitted.find(ord->second.first_tx);
        if (sub != submitted.end()) born = sub->second;
      }
      m.tx_commit_latency.add(ord->second.time - born, ord->second.txs);
    }
  }
}

ordered_json histogram_json(const Histogram& h) {
  ordered_json doc;
  doc["count"] = h.total;
  doc["mean"] = h.mean();
  doc["min"] = h.min() ? ordered_json(*h.min()) : ordered_json(nullptr);
  doc["max"] = h.max() ? ordered_json(*h.max()) : ordered_json(nullptr);
  doc["mode"] = h.mode() ? ordered_json(*h.mode()) : ordered_json(nullptr);
  ordered_json buckets = ordered_json::object();
  for (const auto& [v, c] : h.buckets) buckets[std::to_string(v)] = c;
  doc["buckets"] = buckets;
  return doc;
}

ordered_json metrics_json(const Metrics& m) {
  ordered_json doc;
  doc["all_safe"] = m.all_safe;
  doc["any_livelock"] = m.any_livelock;
  doc["lv_commit_latency"] = histogram_json(m.lv_commit_latency);
  doc["nlv_commit_latency"] = histogram_json(m.nlv_commit_latency);
  doc["tx_commit_latency"] = histogram_json(m.tx_commit_latency);
  ordered_json by_round = ordered_json::object();
  for (const auto& [r, c] : m.traffic_by_round) {
    by_round[std::to_string(r)] = {{"messages", c.messages},
                                   {"bytes", c.bytes}};
  }
  doc["traffic_by_round"] = by_round;
  ordered_json by_kind = ordered_json::object();
  for (const auto& [k, c] : m.traffic_by_kind) {
    by_kind[k] = {{"messages", c.messages}, {"bytes", c.bytes}};
  }
  doc["traffic_by_kind"] = by_kind;
  ordered_json seeds = ordered_json::array();
  for (const SeedOutcome& s : m.seeds) {
    ordered_json e;
    e["seed"] = s.seed;
    e["reason"] = stop_reason_name(s.reason);
    e["end_time"] = s.end_time;
    e["livelock"] = s.livelock;
    e["safety_ok"] = s.safety_ok;
    e["violation"] = s.violation;
    e["rounds_reached"] = s.rounds_reached;
    e["committed_rounds"] = s.committed_rounds;
    seeds.push_back(e);
  }
  doc["seeds"] = seeds;
  return doc;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail("short write to " + path.string());
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const std::optional<DotRequest>& dot) {
  ScenarioResult res;
  Metrics& m = res.metrics;
  const bool check_safety =
      cfg.checks == CheckSet::safety || cfg.checks == CheckSet::all;
  const bool check_liveness =
      cfg.checks == CheckSet::liveness || cfg.checks == CheckSet::all;

  std::filesystem::path out_dir;
  if (!cfg.out_dir.empty()) {
    out_dir = cfg.out_dir;
    std::filesystem::create_directories(out_dir);
  }

  bool first_seed = true;
  for (uint64_t seed : cfg.seeds) {
    SimNet net(cfg.protocol, cfg.sim, cfg.faults, seed);
    uint32_t injection = 0;
    for (const BlockInjection& b : cfg.blocks) {
      Block blk;
      for (uint32_t t = 0; t < b.txs; ++t) {
        blk.txs.push_back({injected_tx_id(b.node, injection, t), b.at});
      }
      ++injection;
      net.schedule_block(b.node, std::move(blk), b.at);
    }

    const RunResult rr = net.run(cfg.stop);

    SeedOutcome out;
    out.seed = seed;
    out.reason = rr.reason;
    out.end_time = rr.end_time;
    out.livelock = rr.livelock;
    for (PartyId i = 0; i < net.node_count(); ++i) {
      out.rounds_reached.push_back(net.node(i).current_round());
      out.committed_rounds.push_back(net.node(i).committed_round());
    }

    if (check_safety) {
      if (auto v = check_run_safety(net)) {
        out.safety_ok = false;
        out.violation = *v;
        m.all_safe = false;
        if (res.exit_code != 2) {
          res.exit_code = 2;
          res.failure = "seed " + std::to_string(seed) + ": " + *v;
        }
      }
    }
    if (rr.livelock) {
      m.any_livelock = true;
      if (check_liveness && res.exit_code == 0) {
        res.exit_code = 3;
        res.failure = "seed " + std::to_string(seed) +
                      ": livelock flagged at t=" + std::to_string(rr.end_time);
      }
    }

    accumulate_metrics(m, net);

    if (first_seed && dot) {
      const ProtocolConfig& pc = cfg.protocol;
      const bool multi = cfg.sim.multileader;
      auto is_leader = [&pc, multi](const Vertex& v) {
        if (!multi) return leader_of(v.round, pc) == v.source;
        const auto& listed = multiple_leaders_of(v.round, pc);
        return std::find(listed.begin(), listed.end(), v.source) !=
               listed.end();
      };
      res.dot = net.node(dot->node).dag().export_dot(dot->lo, dot->hi,
                                                     is_leader);
    }

    if (!out_dir.empty() && cfg.emit_trace) {
      std::ostringstream lines;
      for (const TraceRecord& rec : net.trace()) {
        lines << trace_record_json(rec) << "\n";
      }
      write_text_file(
          out_dir / ("trace_seed_" + std::to_string(seed) + ".jsonl"),
          lines.str());
    }

    m.seeds.push_back(std::move(out));
    first_seed = false;
  }

  if (!out_dir.empty()) {
    write_text_file(out_dir / "metrics.json", metrics_json(m).dump(2) + "\n");
    ordered_json manifest;
    manifest["config"] = ordered_json::parse(cfg.to_json_text());
    manifest["exit_code"] = res.exit_code;
    manifest["failure"] = res.failure;
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return res;
}

}  // namespace angelfish
