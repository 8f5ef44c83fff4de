#include "angelfish/simnet.hpp"

#include <cassert>
#include <cstdio>

#include "angelfish/crypto.hpp"

namespace angelfish {

namespace {

Round message_round(const Message& m) {
  return std::visit([](const auto& x) { return x.round; }, m);
}

// Marks the divergent copy an equivocating sender ships to the second
// receiver half; unique per (sender, round) so the payloads differ.
uint64_t equivocation_marker(PartyId src, Round r) {
  return (0xB1ull << 56) | (uint64_t{src} << 40) | (r & 0xFFFFFFFFFFull);
}

}  // namespace

const char* delay_model_name(DelayModel m) {
  switch (m) {
    case DelayModel::fixed: return "fixed";
    case DelayModel::jitter: return "jitter";
    case DelayModel::adversarial: return "adversarial";
  }
  return "?";
}

std::optional<DelayModel> delay_model_from_name(const std::string& name) {
  if (name == "fixed") return DelayModel::fixed;
  if (name == "jitter") return DelayModel::jitter;
  if (name == "adversarial") return DelayModel::adversarial;
  return std::nullopt;
}

const char* byz_behavior_name(ByzBehavior b) {
  switch (b) {
    case ByzBehavior::equivocate_vertex: return "equivocate_vertex";
    case ByzBehavior::withhold_vertex: return "withhold_vertex";
    case ByzBehavior::false_propose_flag: return "false_propose_flag";
    case ByzBehavior::premature_vote: return "premature_vote";
    case ByzBehavior::silent: return "silent";
  }
  return "?";
}

std::optional<ByzBehavior> byz_behavior_from_name(const std::string& name) {
  if (name == "equivocate_vertex") return ByzBehavior::equivocate_vertex;
  if (name == "withhold_vertex") return ByzBehavior::withhold_vertex;
  if (name == "false_propose_flag") return ByzBehavior::false_propose_flag;
  if (name == "premature_vote") return ByzBehavior::premature_vote;
  if (name == "silent") return ByzBehavior::silent;
  return std::nullopt;
}

size_t FaultScript::fault_count() const {
  std::set<PartyId> parties;
  for (const auto& [p, t] : crashes) parties.insert(p);
  for (const auto& [p, b] : byzantine) parties.insert(p);
  return parties.size();
}

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::send: return "send";
    case TraceKind::deliver: return "deliver";
    case TraceKind::rbc_deliver: return "rbc_deliver";
    case TraceKind::round_enter: return "round_enter";
    case TraceKind::vertex_created: return "vertex_created";
    case TraceKind::timeout_sent: return "timeout_sent";
    case TraceKind::tc_formed: return "tc_formed";
    case TraceKind::direct_commit: return "direct_commit";
    case TraceKind::leader_commit: return "leader_commit";
    case TraceKind::a_deliver: return "a_deliver";
    case TraceKind::equivocation: return "equivocation";
    case TraceKind::invalid_vertex: return "invalid_vertex";
    case TraceKind::crash: return "crash";
    case TraceKind::block_submitted: return "block_submitted";
  }
  return "?";
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::target_reached: return "target_reached";
    case StopReason::time_limit: return "time_limit";
    case StopReason::queue_drained: return "queue_drained";
    case StopReason::livelock: return "livelock";
  }
  return "?";
}

std::string trace_record_json(const TraceRecord& rec) {
  char buf[256];
  std::string digest8 = rec.digest.hex().substr(0, 8);
  std::snprintf(buf, sizeof buf,
                "{\"t\":%lld,\"kind\":\"%s\",\"node\":%u,\"peer\":%lld,"
                "\"round\":%llu,\"digest\":\"%s\",\"a\":%llu,\"b\":%llu}",
                static_cast<long long>(rec.time), trace_kind_name(rec.kind),
                rec.node, static_cast<long long>(rec.peer),
                static_cast<unsigned long long>(rec.round), digest8.c_str(),
                static_cast<unsigned long long>(rec.a),
                static_cast<unsigned long long>(rec.b));
  return buf;
}

// Adapter handing one node's emissions to the network under its identity.
class NodeOutbox : public Outbox {
 public:
  NodeOutbox(SimNet& net, PartyId me) : net_(net), me_(me) {}
  void multicast(Message msg) override { net_.node_multicast(me_, msg); }
  void unicast(PartyId dst, Message msg) override {
    net_.node_unicast(me_, dst, msg);
  }
  void set_timer(Round round, SimTime deadline) override {
    net_.node_set_timer(me_, round, deadline);
  }

 private:
  SimNet& net_;
  PartyId me_;
};

SimNet::SimNet(const ProtocolConfig& cfg, const SimParams& params,
               const FaultScript& script, uint64_t seed)
    : cfg_(cfg), params_(params), script_(script) {
  cfg_.validate();
  assert(params_.delta_cap >= params_.delta_min && params_.delta_min >= 1);
  rng_state_ = mix_seeds(seed, 0x73696d6e6574ULL);  // delay stream

  outboxes_.reserve(cfg_.n);
  nodes_.reserve(cfg_.n);
  NodeObserver& obs = *this;
  for (PartyId i = 0; i < cfg_.n; ++i) {
    outboxes_.push_back(std::make_unique<NodeOutbox>(*this, i));
    if (params_.multileader) {
      nodes_.push_back(std::make_unique<MultiLeaderNode>(
          cfg_, i, seed, params_.txs_per_vertex, *outboxes_.back(), obs));
    } else {
      nodes_.push_back(std::make_unique<AngelfishNode>(
          cfg_, i, seed, params_.txs_per_vertex, *outboxes_.back(), obs));
    }
  }

  for (const auto& [party, at] : script_.crashes) {
    assert(party < cfg_.n);
    if (at <= 0) {
      mark_crashed(party, 0);
    } else {
      QueuedEvent ev;
      ev.at = at;
      ev.klass = QueuedEvent::Class::crash;
      ev.src = party;
      push(std::move(ev));
    }
  }
}

SimNet::~SimNet() = default;

bool SimNet::healthy(PartyId i) const {
  return script_.crashes.count(i) == 0 && script_.byzantine.count(i) == 0;
}

void SimNet::schedule_block(PartyId node, Block block, SimTime at) {
  assert(!ran_ && node < cfg_.n && at >= 0);
  QueuedEvent ev;
  ev.at = at;
  ev.klass = QueuedEvent::Class::block;
  ev.dst = node;
  ev.block = std::move(block);
  push(std::move(ev));
}

RunResult SimNet::run(const StopRule& stop) {
  assert(!ran_);
  ran_ = true;

  for (PartyId i = 0; i < cfg_.n; ++i) {
    if (!crashed_.count(i)) nodes_[i]->start(0);
  }

  while (true) {
    if (target_met(stop)) return {StopReason::target_reached, now_, false};
    if (queue_.empty()) {
      // Nothing can ever happen again; unmet commit targets make that a
      // livelock rather than a clean quiescence.
      const bool starved = stop.min_committed_round.has_value();
      return {starved ? StopReason::livelock : StopReason::queue_drained,
              now_, starved};
    }
    const SimTime next_at = queue_.top().at;
    if (stop.max_time && next_at > *stop.max_time) {
      return {StopReason::time_limit, *stop.max_time, false};
    }
    if (stop.min_committed_round) {
      // Post-GST the protocol always has a bounded next step; a long quiet
      // stretch while commits are still owed means it has wedged.
      const SimTime quiet_from = std::max(now_, params_.gst);
      if (next_at - quiet_from > 10 * params_.delta_cap) {
        return {StopReason::livelock, now_, true};
      }
    }
    QueuedEvent ev = queue_.top();
    queue_.pop();
    now_ = ev.at;
    dispatch(ev);
  }
}

bool SimNet::target_met(const StopRule& stop) const {
  if (!stop.min_committed_round) return false;
  bool any = false;
  for (PartyId i = 0; i < cfg_.n; ++i) {
    if (!healthy(i)) continue;
    any = true;
    if (nodes_[i]->committed_round() < *stop.min_committed_round) return false;
  }
  return any;
}

void SimNet::dispatch(const QueuedEvent& ev) {
  switch (ev.klass) {
    case QueuedEvent::Class::crash:
      mark_crashed(ev.src, now_);
      break;
    case QueuedEvent::Class::block: {
      if (crashed_.count(ev.dst)) break;
      TraceRecord rec;
      rec.time = now_;
      rec.kind = TraceKind::block_submitted;
      rec.node = ev.dst;
      if (!ev.block->txs.empty()) rec.b = ev.block->txs.front().id;
      record(rec);
      nodes_[ev.dst]->a_bcast(*ev.block, now_);
      break;
    }
    case QueuedEvent::Class::message: {
      if (crashed_.count(ev.dst)) break;
      Message m;
      try {
        m = decode_message(ev.payload);
      } catch (const CodecError&) {
        break;
      }
      TraceRecord rec;
      rec.time = now_;
      rec.kind = TraceKind::deliver;
      rec.node = ev.dst;
      rec.peer = ev.src;
      rec.round = message_round(m);
      rec.a = ev.payload.size();
      rec.b = static_cast<uint64_t>(message_kind(m));
      record(rec);
      nodes_[ev.dst]->on_message(ev.src, m, now_);
      break;
    }
    case QueuedEvent::Class::timer:
      if (crashed_.count(ev.src)) break;
      nodes_[ev.src]->on_timer(ev.round, now_);
      break;
  }
}

void SimNet::mark_crashed(PartyId i, SimTime at) {
  if (!crashed_.insert(i).second) return;
  TraceRecord rec;
  rec.time = at;
  rec.kind = TraceKind::crash;
  rec.node = i;
  record(rec);
}

void SimNet::node_multicast(PartyId src, const Message& m) {
  if (crashed_.count(src)) return;
  auto bz = script_.byzantine.find(src);
  if (bz != script_.byzantine.end()) {
    if (bz->second == ByzBehavior::silent) return;
    if (bz->second == ByzBehavior::premature_vote) {
      inject_premature_votes(src, m);
    }
  }
  for (PartyId dst = 0; dst < cfg_.n; ++dst) send_one(src, dst, m);
}

void SimNet::node_unicast(PartyId src, PartyId dst, const Message& m) {
  if (crashed_.count(src)) return;
  auto bz = script_.byzantine.find(src);
  if (bz != script_.byzantine.end() && bz->second == ByzBehavior::silent) {
    return;
  }
  send_one(src, dst, m);
}

void SimNet::node_set_timer(PartyId src, Round round, SimTime deadline) {
  if (crashed_.count(src)) return;
  QueuedEvent ev;
  ev.at = deadline;
  ev.klass = QueuedEvent::Class::timer;
  ev.src = src;
  ev.round = round;
  push(std::move(ev));
}

void SimNet::inject_premature_votes(PartyId src, const Message& m) {
  const WireKind kind = message_kind(m);
  if (kind != WireKind::vote && kind != WireKind::rbc_send) return;
  const Round next = message_round(m) + 1;
  if (!premature_sent_.insert({src, next}).second) return;
  Vote vt;
  vt.round = next;
  vt.source = src;
  vt.propose = true;
  vt.sig = sign(src, vote_content_digest(vt.round, vt.propose, {}));
  for (PartyId dst = 0; dst < cfg_.n; ++dst) send_one(src, dst, vt);
}

void SimNet::send_one(PartyId src, PartyId dst, const Message& m) {
  Message out = m;
  if (dst != src && !apply_behavior(src, dst, out)) return;

  QueuedEvent ev;
  ev.klass = QueuedEvent::Class::message;
  ev.src = src;
  ev.dst = dst;
  ev.payload = encode_message(out);

  if (dst == src) {
    // Local hand-back: the node sees its own traffic with no network hop
    // and no byte accounting.
    ev.at = now_;
  } else {
    const SimTime delay = draw_delay();
    ev.at = now_ + delay;
    const Round r = message_round(out);
    const WireKind kind = message_kind(out);
    const uint64_t bytes = ev.payload.size();
    traffic_by_round_[r].messages += 1;
    traffic_by_round_[r].bytes += bytes;
    traffic_by_kind_[kind].messages += 1;
    traffic_by_kind_[kind].bytes += bytes;
    total_.messages += 1;
    total_.bytes += bytes;

    TraceRecord rec;
    rec.time = now_;
    rec.kind = TraceKind::send;
    rec.node = src;
    rec.peer = dst;
    rec.round = r;
    rec.a = bytes;
    rec.b = static_cast<uint64_t>(kind) |
            (static_cast<uint64_t>(delay) << 8);
    record(rec);
  }
  push(std::move(ev));
}

bool SimNet::apply_behavior(PartyId src, PartyId dst, Message& m) {
  auto it = script_.byzantine.find(src);
  if (it == script_.byzantine.end()) return true;
  const bool upper_half = dst >= cfg_.n / 2;
  auto* rm = std::get_if<RbcMsg>(&m);
  const bool own_send =
      rm != nullptr && rm->kind == WireKind::rbc_send && rm->origin == src;

  switch (it->second) {
    case ByzBehavior::silent:
      return false;
    case ByzBehavior::equivocate_vertex:
      if (own_send && upper_half) {
        Vertex v = decode_vertex(rm->payload);
        v.block.txs.push_back(
            {equivocation_marker(src, v.round), now_});
        rm->payload = encode_vertex(v);
        rm->digest = sha256(rm->payload);
      }
      return true;
    case ByzBehavior::withhold_vertex:
      return !(own_send && upper_half);
    case ByzBehavior::false_propose_flag:
      if (upper_half) {
        if (auto* vt = std::get_if<Vote>(&m)) {
          vt->propose = !vt->propose;
          vt->sig = sign(src, vote_content_digest(vt->round, vt->propose,
                                                  vt->strong_edges));
        } else if (own_send) {
          Vertex v = decode_vertex(rm->payload);
          v.propose = !v.propose;
          rm->payload = encode_vertex(v);
          rm->digest = sha256(rm->payload);
        }
      }
      return true;
    case ByzBehavior::premature_vote:
      return true;
  }
  return true;
}

SimTime SimNet::draw_delay() {
  switch (params_.delay_model) {
    case DelayModel::fixed:
      return params_.delta_min;
    case DelayModel::jitter: {
      const uint64_t span =
          static_cast<uint64_t>(params_.delta_cap - params_.delta_min);
      return params_.delta_min +
             static_cast<SimTime>(next_rand() % (span + 1));
    }
    case DelayModel::adversarial: {
      if (now_ >= params_.gst) return params_.delta_min;
      // Park anywhere up to the stabilization horizon; every pre-GST send
      // still lands by GST + delta_cap.
      const SimTime lo = now_ + params_.delta_min;
      const SimTime span = params_.gst + params_.delta_cap - lo;
      return params_.delta_min +
             static_cast<SimTime>(next_rand() %
                                  static_cast<uint64_t>(span + 1));
    }
  }
  return params_.delta_min;
}

uint64_t SimNet::next_rand() {
  rng_state_ = splitmix64(rng_state_);
  return rng_state_;
}

void SimNet::push(QueuedEvent ev) {
  ev.seq = next_seq_++;
  queue_.push(std::move(ev));
}

void SimNet::record(TraceRecord rec) { trace_.push_back(std::move(rec)); }

void SimNet::on_round_entered(PartyId node, Round r, SimTime now,
                              bool via_leader, bool jumped) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::round_enter;
  rec.node = node;
  rec.round = r;
  rec.a = via_leader ? 1 : 0;
  rec.b = jumped ? 1 : 0;
  record(rec);
}

void SimNet::on_vertex_created(PartyId node, const Vertex& v, const Digest& id,
                               SimTime now, bool sequential_entry,
                               size_t proposer_count_at_creation,
                               size_t prev_round_size_at_creation) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::vertex_created;
  rec.node = node;
  rec.peer = sequential_entry ? 1 : 0;
  rec.round = v.round;
  rec.digest = id;
  rec.a = proposer_count_at_creation;
  rec.b = prev_round_size_at_creation;
  record(rec);
}

void SimNet::on_timeout_sent(PartyId node, Round r, SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::timeout_sent;
  rec.node = node;
  rec.round = r;
  record(rec);
}

void SimNet::on_tc_formed(PartyId node, Round r, SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::tc_formed;
  rec.node = node;
  rec.round = r;
  record(rec);
}

void SimNet::on_direct_commit(PartyId node, Round r, PartyId leader,
                              const Digest& id, SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::direct_commit;
  rec.node = node;
  rec.peer = leader;
  rec.round = r;
  rec.digest = id;
  record(rec);
}

void SimNet::on_leader_committed(PartyId node, Round r, PartyId leader,
                                 const Digest& id, bool direct, SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::leader_commit;
  rec.node = node;
  rec.peer = leader;
  rec.round = r;
  rec.digest = id;
  rec.a = direct ? 1 : 0;
  record(rec);
}

void SimNet::on_a_deliver(PartyId node, const Vertex& v, const Digest& id,
                          SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::a_deliver;
  rec.node = node;
  rec.peer = v.source;
  rec.round = v.round;
  rec.digest = id;
  rec.a = v.block.txs.size();
  if (!v.block.txs.empty()) rec.b = v.block.txs.front().id;
  record(rec);
}

void SimNet::on_rbc_delivered(PartyId node, Round r, PartyId origin,
                              const Digest& payload_digest, SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::rbc_deliver;
  rec.node = node;
  rec.peer = origin;
  rec.round = r;
  rec.digest = payload_digest;
  record(rec);
}

void SimNet::on_equivocation(PartyId node, Round r, PartyId origin,
                             SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::equivocation;
  rec.node = node;
  rec.peer = origin;
  rec.round = r;
  record(rec);
}

void SimNet::on_invalid_vertex(PartyId node, Round r, PartyId origin,
                               SimTime now) {
  TraceRecord rec;
  rec.time = now;
  rec.kind = TraceKind::invalid_vertex;
  rec.node = node;
  rec.peer = origin;
  rec.round = r;
  record(rec);
}

}  // namespace angelfish
