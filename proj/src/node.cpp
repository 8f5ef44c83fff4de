#include "angelfish/node.hpp"

#include <algorithm>
#include <cassert>

namespace angelfish {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

void fold_aggregate(std::map<Digest, AggregateSignature>& variants,
                    const AggregateSignature& agg) {
  auto& slot = variants[agg.content];
  if (slot.signers.empty()) {
    slot = agg;
  } else {
    slot = merge_aggregates(slot, agg);
  }
}

}  // namespace

NodeCore::NodeCore(const ProtocolConfig& cfg, PartyId me, uint64_t run_seed,
                   uint32_t synthetic_txs_per_vertex, Outbox& out,
                   NodeObserver& obs)
    : cfg_(cfg),
      me_(me),
      policy_seed_(mix_seeds(run_seed, 0x70726f70ull + me)),
      synthetic_txs_(synthetic_txs_per_vertex),
      out_(out),
      obs_(obs),
      rbc_(cfg.rbc_kind, me, cfg.n, cfg.f),
      dag_([this](const Vertex& v, const DagStore& d) {
        return accept_vertex(v, d);
      }) {}

void NodeCore::start(SimTime now) {
  if (round_ != 0) return;
  enter_round(1, /*via_leader=*/true, /*jumped=*/false, now);
  poll(now);
}

void NodeCore::on_message(PartyId src, const Message& m, SimTime now) {
  if (round_ == 0) return;  // not started yet
  std::visit(
      Overload{
          [&](const RbcMsg& r) { handle_rbc(src, r, now); },
          [&](const Vote& v) { handle_vote(src, v, now); },
          [&](const TimeoutMessage& t) { handle_timeout_msg(t, now); },
          [&](const TimeoutCertificate& tc) {
            store_tc(tc, now);
            if (tcs_.count(tc.round) && tc.round >= round_ &&
                !tc_sent_.count(tc.round)) {
              tc_sent_.insert(tc.round);
              emit(tcs_.at(tc.round));
            }
          },
          [&](const VoteCertificate& c) { handle_vote_cert(c, now); },
          [&](const NoVoteMessage& nv) { handle_no_vote(nv, now); },
          [&](const NoVoteCertificate&) {
            // No-vote certificates only travel embedded in vertices.
          },
      },
      m);
  poll(now);
}

void NodeCore::on_timer(Round round, SimTime now) {
  if (round_ == 0) return;
  if (round != round_) return;  // stale timer from a round already left
  if (lead_vertex_delivered(round)) return;
  if (timeout_sent_.count(round)) return;
  timeout_sent_.insert(round);
  TimeoutMessage tm;
  tm.round = round;
  tm.source = me_;
  tm.sig = sign(me_, timeout_content_digest(round));
  emit(tm);
  obs_.on_timeout_sent(me_, round, now);
  abandon_pending(round, now);
  poll(now);
}

void NodeCore::a_bcast(Block b, SimTime now) {
  (void)now;  // the block rides in the next created vertex
  blocks_.push_back(std::move(b));
}

void NodeCore::poll(SimTime now) {
  if (in_poll_) return;
  in_poll_ = true;
  bool changed = true;
  while (changed) {
    changed = false;
    if (try_commit(now)) changed = true;
    if (try_advance(now)) changed = true;
    if (flush_pending(now)) changed = true;
  }
  in_poll_ = false;
}

bool NodeCore::try_advance(SimTime now) {
  const Round cur = round_;
  for (Round cand = max_round_seen_; cand >= cur; --cand) {
    const bool sequential = (cand == cur);
    const size_t need = sequential ? cfg_.quorum() : size_t{cfg_.f} + 1;
    SignerSet sup = vote_support(cand);
    sup.merge(dag_.round_sources(cand));
    if (sup.size() < need) continue;
    const bool lv = lead_vertex_delivered(cand);
    if (!lv && !tcs_.count(cand)) continue;
    if (me_ == round_leader(cand + 1) && !leader_chain_ready(cand)) continue;
    if (sequential) pre_advance(cand, now);
    enter_round(cand + 1, lv, !sequential, now);
    return true;
  }
  return false;
}

void NodeCore::enter_round(Round r, bool via_leader, bool jumped,
                           SimTime now) {
  round_ = r;
  saw_round(r);
  obs_.on_round_entered(me_, r, now, via_leader, jumped);
  const SimTime span = via_leader ? cfg_.timeout_tau : cfg_.slow_timeout();
  out_.set_timer(r, now + span);
  propose_phase(r, jumped, now);
}

void NodeCore::handle_rbc(PartyId src, const RbcMsg& m, SimTime now) {
  std::vector<RbcOut> outs;
  std::vector<RbcEvent> events;
  rbc_.on_message(src, m, outs, events);
  flush_rbc(outs);
  for (const auto& ev : events) {
    switch (ev.kind) {
      case RbcEvent::Kind::first_message: {
        Vertex v;
        try {
          v = decode_vertex(ev.payload);
        } catch (const CodecError&) {
          break;
        }
        if (v.round != ev.round || v.source != ev.origin) break;
        auto& slot = first_msgs_[v.round];
        slot.emplace(v.source, v.strong_edges);  // keep the first one
        saw_round(v.round);
        break;
      }
      case RbcEvent::Kind::delivered: {
        obs_.on_rbc_delivered(me_, ev.round, ev.origin, sha256(ev.payload),
                              now);
        Vertex v;
        try {
          v = decode_vertex(ev.payload);
        } catch (const CodecError&) {
          break;
        }
        if (v.round != ev.round || v.source != ev.origin) break;
        deliver_vertex(v, now);
        break;
      }
      case RbcEvent::Kind::equivocation:
        obs_.on_equivocation(me_, ev.round, ev.origin, now);
        break;
    }
  }
}

void NodeCore::deliver_vertex(const Vertex& v, SimTime now) {
  auto outcome = dag_.try_add(v);
  if (outcome.rejected) {
    obs_.on_invalid_vertex(me_, v.round, v.source, now);
    return;
  }
  for (const Vertex* u : outcome.inserted) {
    saw_round(u->round);
    if (u->propose) note_proposer(u->round, u->source);
    for (const auto& tc : u->tcs) store_tc(tc, now);
    note_vertex(*u, now);
  }
}

void NodeCore::handle_timeout_msg(const TimeoutMessage& tm, SimTime now) {
  if (tm.round < 1 || tm.source >= cfg_.n) return;
  if (tm.sig.signer != tm.source) return;
  if (!verify(tm.sig, timeout_content_digest(tm.round))) return;
  saw_round(tm.round);
  auto& agg = timeout_sigs_[tm.round];
  if (agg.signers.contains(tm.source)) return;
  aggregate_insert(agg, tm.sig);
  if (agg.signers.size() >= cfg_.quorum() && !tcs_.count(tm.round)) {
    TimeoutCertificate tc;
    tc.round = tm.round;
    tc.agg = agg;
    store_tc(tc, now);
    if (!tc_sent_.count(tc.round)) {
      tc_sent_.insert(tc.round);
      emit(tc);
    }
  }
}

void NodeCore::store_tc(const TimeoutCertificate& tc, SimTime now) {
  if (tcs_.count(tc.round)) return;
  if (!tc_valid(tc, cfg_)) return;
  tcs_.emplace(tc.round, tc);
  saw_round(tc.round);
  obs_.on_tc_formed(me_, tc.round, now);
}

void NodeCore::emit_vertex(const Vertex& v, bool sequential_entry,
                           SimTime now) {
  const Digest id = vertex_id(v);
  const size_t vp =
      v.round >= 2 ? proposer_count(v.round - 2) : 0;
  const size_t prev = v.round >= 2 ? dag_.round_size(v.round - 1) : 0;
  obs_.on_vertex_created(me_, v, id, now, sequential_entry, vp, prev);
  deliver_vertex(v, now);  // own vertex joins the local DAG immediately
  std::vector<RbcOut> outs;
  rbc_.broadcast(v.round, encode_vertex(v), outs);
  flush_rbc(outs);
}

void NodeCore::flush_rbc(std::vector<RbcOut>& outs) {
  for (auto& o : outs) {
    if (o.dst) {
      out_.unicast(*o.dst, Message{std::move(o.msg)});
    } else {
      out_.multicast(Message{std::move(o.msg)});
    }
  }
  outs.clear();
}

std::vector<Digest> NodeCore::strong_edge_targets(Round r) const {
  std::vector<Digest> targets;
  if (r < 2) return targets;
  const bool drop_leader = timeout_sent_.count(r - 1) != 0;
  const PartyId prev_leader = round_leader(r - 1);
  for (const Vertex* u : dag_.round_vertices(r - 1)) {
    if (drop_leader && u->source == prev_leader) continue;
    targets.push_back(dag_.id_of(*u));
  }
  return targets;
}

std::optional<std::vector<TimeoutCertificate>> NodeCore::tc_chain(
    Round after, Round upto) const {
  std::vector<TimeoutCertificate> chain;
  for (Round rr = after + 1; rr <= upto; ++rr) {
    auto it = tcs_.find(rr);
    if (it == tcs_.end()) return std::nullopt;
    chain.push_back(it->second);
  }
  return chain;
}

Round NodeCore::last_lead_round_below(Round r) const {
  for (Round rr = r; rr-- > 1;) {
    if (lead_vertex_delivered(rr)) return rr;
  }
  return 0;
}

bool NodeCore::leader_chain_ready(Round r) const {
  if (lead_vertex_delivered(r)) return true;
  if (!tcs_.count(r)) return false;
  for (Round rr = r; rr-- > 1;) {
    if (lead_vertex_delivered(rr)) return true;
    if (!tcs_.count(rr)) return false;
  }
  return true;  // timeout certificates reach back to the first round
}

bool NodeCore::wants_vertex(Round r) const {
  if (must_propose(r)) return true;
  if (!blocks_.empty()) return true;
  if (cfg_.propose_rate >= 1.0) return true;
  if (cfg_.propose_rate <= 0.0) return false;
  const uint64_t x = mix_seeds(policy_seed_, r);
  return static_cast<double>(x >> 11) * 0x1.0p-53 < cfg_.propose_rate;
}

bool NodeCore::announce_propose(Round next_round) const {
  return wants_vertex(next_round);
}

Block NodeCore::next_block(SimTime now) {
  if (!blocks_.empty()) {
    Block b = std::move(blocks_.front());
    blocks_.pop_front();
    return b;
  }
  Block b;
  b.txs.reserve(synthetic_txs_);
  for (uint32_t i = 0; i < synthetic_txs_; ++i) {
    Tx tx;
    tx.id = (static_cast<uint64_t>(me_) << 40) | tx_counter_++;
    tx.created_at = now;
    b.txs.push_back(tx);
  }
  return b;
}

void NodeCore::order_vertices(
    const std::vector<std::vector<const Vertex*>>& walk, Round direct_round,
    SimTime now) {
  for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
    for (const Vertex* lv : *it) {
      const Digest lv_id = dag_.id_of(*lv);
      obs_.on_leader_committed(me_, lv->round, lv->source, lv_id,
                               lv->round == direct_round, now);
      std::vector<const Vertex*> history;
      for (const Vertex* u : dag_.causal_history(lv_id)) {
        if (!ordered_.count(dag_.id_of(*u))) history.push_back(u);
      }
      std::sort(history.begin(), history.end(),
                [this](const Vertex* a, const Vertex* b) {
                  if (a->round != b->round) return a->round < b->round;
                  if (a->source != b->source) return a->source < b->source;
                  return dag_.id_of(*a) < dag_.id_of(*b);
                });
      for (const Vertex* u : history) {
        ordered_.insert(dag_.id_of(*u));
        ordered_log_.push_back(u);
        obs_.on_a_deliver(me_, *u, dag_.id_of(*u), now);
      }
    }
  }
}

size_t NodeCore::proposer_count(Round r) const {
  auto it = proposers_.find(r);
  return it == proposers_.end() ? 0 : it->second.size();
}

void NodeCore::note_proposer(Round r, PartyId p) { proposers_[r].insert(p); }

void NodeCore::saw_round(Round r) {
  if (r > max_round_seen_) max_round_seen_ = r;
}

bool NodeCore::first_message_edges(Round r, PartyId source,
                                   std::vector<Digest>* edges) const {
  auto it = first_msgs_.find(r);
  if (it == first_msgs_.end()) return false;
  auto jt = it->second.find(source);
  if (jt == it->second.end()) return false;
  if (edges) *edges = jt->second;
  return true;
}

SignerSet NodeCore::first_message_support(Round r, const Digest& id) const {
  SignerSet s;
  auto it = first_msgs_.find(r);
  if (it == first_msgs_.end()) return s;
  for (const auto& [source, edges] : it->second) {
    if (std::find(edges.begin(), edges.end(), id) != edges.end()) {
      s.insert(source);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Single-leader node
// ---------------------------------------------------------------------------

AngelfishNode::AngelfishNode(const ProtocolConfig& cfg, PartyId me,
                             uint64_t run_seed,
                             uint32_t synthetic_txs_per_vertex, Outbox& out,
                             NodeObserver& obs)
    : NodeCore(cfg, me, run_seed, synthetic_txs_per_vertex, out, obs) {}

PartyId AngelfishNode::round_leader(Round r) const {
  return leader_of(r, cfg());
}

bool AngelfishNode::accept_vertex(const Vertex& v, const DagStore& dag) const {
  if (v.nvc.has_value()) return false;  // multi-leader field
  const bool is_lead = (v.source == leader_of(v.round, cfg()));
  if (!is_lead) {
    // Ordinary vertices carry neither leader edges nor certificates.
    return v.leader_edges.empty() && v.tcs.empty();
  }
  if (v.round == 1) return v.leader_edges.empty() && v.tcs.empty();
  const PartyId prev_leader = leader_of(v.round - 1, cfg());
  for (const auto& t : v.strong_edges) {
    const Vertex* u = dag.get_by_id(t);
    if (u && u->round == v.round - 1 && u->source == prev_leader) {
      // Chained to the previous lead vertex directly; nothing else allowed.
      return v.leader_edges.empty() && v.tcs.empty();
    }
  }
  Round anchor = 0;
  if (!v.leader_edges.empty()) {
    if (v.leader_edges.size() != 1) return false;
    const Vertex* u = dag.get_by_id(v.leader_edges[0]);
    if (!u) return false;
    if (u->source != leader_of(u->round, cfg())) return false;
    anchor = u->round;
  }
  // Timeout certificates must bridge every round between the anchor (or
  // the very beginning) and this vertex, in ascending order.
  Round expect = anchor + 1;
  for (const auto& tc : v.tcs) {
    if (tc.round != expect) return false;
    if (!tc_valid(tc, cfg())) return false;
    ++expect;
  }
  return expect == v.round;
}

SignerSet AngelfishNode::vote_support(Round r) const {
  auto it = votes_.find(r);
  return it == votes_.end() ? SignerSet{} : it->second.sources;
}

void AngelfishNode::handle_vote(PartyId src, const Vote& vt, SimTime now) {
  (void)src;  // votes may arrive relayed; the signature binds the voter
  (void)now;
  if (vt.round < 1 || vt.source >= cfg().n) return;
  if (vt.sig.signer != vt.source) return;
  if (vt.strong_edges.size() > 1) return;
  if (vt.round == 1 && !vt.strong_edges.empty()) return;
  if (!verify(vt.sig,
              vote_content_digest(vt.round, vt.propose, vt.strong_edges))) {
    return;
  }
  if (!vt.strong_edges.empty()) {
    // The only admissible target is the previous round's lead vertex.
    const Vertex* u = dag().get_by_id(vt.strong_edges[0]);
    if (u && !(u->round == vt.round - 1 &&
               u->source == leader_of(vt.round - 1, cfg()))) {
      return;
    }
  }
  auto& tally = votes_[vt.round];
  if (!tally.votes.emplace(vt.source, vt).second) return;
  tally.sources.insert(vt.source);
  auto& variants =
      vt.propose ? tally.propose_variants : tally.no_propose_variants;
  aggregate_insert(variants[vt.sig.content], vt.sig);
  if (vt.propose) note_proposer(vt.round, vt.source);
  saw_round(vt.round);
}

bool AngelfishNode::fold_variant(VoteRole role, Round round,
                                 const AggregateSignature& agg) {
  if (agg.signers.empty()) return true;  // nothing of value; drop
  if (role == VoteRole::commit) {
    const Vertex* lv = lead_vertex(round);
    if (!lv) return false;  // retry once the lead vertex lands
    const Digest lv_id = dag().id_of(*lv);
    for (bool flag : {true, false}) {
      const Digest c =
          vote_content_digest(round + 1, flag, {lv_id});
      if (agg.content != c) continue;
      if (!verify_aggregate(agg, c, cfg().n)) return true;  // junk; drop
      commit_cert_sources_[round].merge(agg.signers);
      fold_aggregate(commit_cert_variants_[round], agg);
      saw_round(round + 1);
      return true;
    }
    return true;  // content matches no commit vote for this leader; drop
  }
  const bool flag = (role == VoteRole::propose);
  std::vector<Digest> candidates;
  candidates.push_back(vote_content_digest(round, flag, {}));
  bool lead_known = true;
  if (round >= 2) {
    const Vertex* lv = lead_vertex(round - 1);
    if (lv) {
      candidates.push_back(
          vote_content_digest(round, flag, {dag().id_of(*lv)}));
    } else {
      lead_known = false;
    }
  }
  for (const Digest& c : candidates) {
    if (agg.content != c) continue;
    if (!verify_aggregate(agg, c, cfg().n)) return true;  // junk; drop
    auto& tally = votes_[round];
    tally.sources.merge(agg.signers);
    auto& variants =
        flag ? tally.propose_variants : tally.no_propose_variants;
    fold_aggregate(variants, agg);
    if (flag) {
      for (PartyId p : agg.signers) note_proposer(round, p);
    }
    saw_round(round);
    return true;
  }
  // Might match the edge-carrying variant once the lead vertex arrives.
  return lead_known;
}

void AngelfishNode::handle_vote_cert(const VoteCertificate& cert,
                                     SimTime now) {
  (void)now;
  if (cert.variants.empty()) return;
  bool all_settled = true;
  for (const auto& agg : cert.variants) {
    if (!fold_variant(cert.role, cert.round, agg)) all_settled = false;
  }
  if (!all_settled) unresolved_certs_.push_back(cert);
}

void AngelfishNode::handle_no_vote(const NoVoteMessage&, SimTime) {
  // Single-leader mode has no use for no-votes.
}

void AngelfishNode::note_vertex(const Vertex& v, SimTime now) {
  if (v.source == leader_of(v.round, cfg())) refold_pending(now);
}

void AngelfishNode::refold_pending(SimTime now) {
  (void)now;
  auto it = unresolved_certs_.begin();
  while (it != unresolved_certs_.end()) {
    bool stale = it->round <= committed_round() ||
                 it->round + 4 < current_round();
    bool all_settled = true;
    if (!stale) {
      for (const auto& agg : it->variants) {
        if (!fold_variant(it->role, it->round, agg)) all_settled = false;
      }
    }
    if (stale || all_settled) {
      it = unresolved_certs_.erase(it);
    } else {
      ++it;
    }
  }
}

SignerSet AngelfishNode::commit_support(Round r, const Digest& lv_id) const {
  SignerSet s = first_message_support(r + 1, lv_id);
  auto it = votes_.find(r + 1);
  if (it != votes_.end()) {
    for (const auto& [source, vt] : it->second.votes) {
      if (!vt.strong_edges.empty() && vt.strong_edges[0] == lv_id) {
        s.insert(source);
      }
    }
  }
  auto c = commit_cert_sources_.find(r);
  if (c != commit_cert_sources_.end()) s.merge(c->second);
  return s;
}

bool AngelfishNode::try_commit(SimTime now) {
  bool progressed = false;
  for (Round r = committed_round() + 1; r <= max_round_seen(); ++r) {
    const Vertex* lv = lead_vertex(r);
    if (!lv) continue;
    const Digest lv_id = dag().id_of(*lv);
    if (commit_support(r, lv_id).size() < cfg().quorum()) continue;
    observer().on_direct_commit(me(), r, lv->source, lv_id, now);
    maybe_send_commit_cert(r, lv_id);
    commit_leader(r, lv, now);
    progressed = true;
  }
  return progressed;
}

void AngelfishNode::maybe_send_commit_cert(Round r, const Digest& lv_id) {
  if (commit_cert_sent_.count(r)) return;
  // With a quorum of vertex first messages behind the leader, everyone
  // commits from traffic they already see; otherwise circulate signatures.
  if (first_message_support(r + 1, lv_id).size() >= cfg().quorum()) return;
  std::map<Digest, AggregateSignature> variants;
  auto known = commit_cert_variants_.find(r);
  if (known != commit_cert_variants_.end()) variants = known->second;
  auto it = votes_.find(r + 1);
  if (it != votes_.end()) {
    for (const auto& [source, vt] : it->second.votes) {
      if (!vt.strong_edges.empty() && vt.strong_edges[0] == lv_id) {
        auto& slot = variants[vt.sig.content];
        if (!slot.signers.contains(source)) aggregate_insert(slot, vt.sig);
      }
    }
  }
  if (variants.empty()) return;
  VoteCertificate cvc;
  cvc.role = VoteRole::commit;
  cvc.round = r;
  cvc.issuer = me();
  for (auto& [content, agg] : variants) cvc.variants.push_back(agg);
  commit_cert_sent_.insert(r);
  emit(cvc);
}

void AngelfishNode::commit_leader(Round r, const Vertex* lv, SimTime now) {
  std::vector<std::vector<const Vertex*>> walk;
  walk.push_back({lv});
  const Vertex* cur = lv;
  auto is_lead = [this](const Vertex& v) {
    return v.source == leader_of(v.round, cfg());
  };
  for (Round rr = r; rr-- > committed_round() + 1;) {
    const Vertex* u = lead_vertex(rr);
    if (!u) continue;
    if (dag().leader_path(dag().id_of(*cur), dag().id_of(*u), is_lead)) {
      walk.push_back({u});
      cur = u;
    }
  }
  set_committed_round(r);
  order_vertices(walk, r, now);
}

void AngelfishNode::propose_phase(Round r, bool jumped, SimTime now) {
  if (wants_vertex(r)) {
    pending_vertex_ = r;
    pending_jumped_ = jumped;
    flush_pending(now);
  } else {
    send_vote(r, now);
  }
}

bool AngelfishNode::flush_pending(SimTime now) {
  if (!pending_vertex_) return false;
  const Round r = *pending_vertex_;
  if (r != current_round()) {  // overtaken by a later round
    pending_vertex_.reset();
    return false;
  }
  if (!pending_jumped_ && r >= 2) {
    // Pace on the announced proposer count for the previous round.
    const size_t vp = proposer_count(r - 2);
    const size_t need = vp > cfg().f ? vp - cfg().f : 0;
    if (dag().round_size(r - 1) < need) return false;
  }
  if (me() == round_leader(r) && r >= 2) {
    const bool strong_ok =
        lead_vertex_delivered(r - 1) && !sent_timeout(r - 1);
    if (!strong_ok) {
      const Round anchor = last_lead_round_below(r - 1);
      if (!tc_chain(anchor, r - 1)) return false;  // chain incomplete; wait
    }
  }
  const bool sequential = !pending_jumped_;
  pending_vertex_.reset();
  create_vertex(r, sequential, now);
  return true;
}

void AngelfishNode::create_vertex(Round r, bool sequential, SimTime now) {
  Vertex v;
  v.round = r;
  v.source = me();
  v.strong_edges = strong_edge_targets(r);
  if (me() == round_leader(r) && r >= 2) {
    const bool strong_ok =
        lead_vertex_delivered(r - 1) && !sent_timeout(r - 1);
    if (!strong_ok) {
      const Round anchor = last_lead_round_below(r - 1);
      if (anchor >= 1) {
        v.leader_edges.push_back(dag().id_of(*lead_vertex(anchor)));
      }
      auto chain = tc_chain(anchor, r - 1);
      assert(chain.has_value());
      v.tcs = std::move(*chain);
    }
  }
  v.propose = announce_propose(r + 1);
  v.block = next_block(now);
  std::vector<Digest> covered = v.strong_edges;
  covered.insert(covered.end(), v.leader_edges.begin(), v.leader_edges.end());
  v.weak_edges = dag().compute_weak_edges(r, covered);
  emit_vertex(v, sequential, now);
}

void AngelfishNode::send_vote(Round r, SimTime now) {
  (void)now;
  Vote vt;
  vt.round = r;
  vt.source = me();
  vt.propose = announce_propose(r + 1);
  if (r >= 2 && !sent_timeout(r - 1) && lead_vertex_delivered(r - 1)) {
    vt.strong_edges.push_back(dag().id_of(*lead_vertex(r - 1)));
  }
  vt.sig = sign(me(), vote_content_digest(vt.round, vt.propose,
                                          vt.strong_edges));
  emit(vt);
}

void AngelfishNode::abandon_pending(Round r, SimTime now) {
  if (!pending_vertex_ || *pending_vertex_ != r) return;
  pending_vertex_.reset();
  send_vote(r, now);
}

void AngelfishNode::pre_advance(Round r, SimTime now) {
  (void)now;
  if (dag().round_size(r) >= cfg().quorum()) return;
  auto it = votes_.find(r);
  if (it == votes_.end()) return;
  auto send_cert = [&](VoteRole role,
                       const std::map<Digest, AggregateSignature>& variants) {
    if (variants.empty()) return;
    VoteCertificate cert;
    cert.role = role;
    cert.round = r;
    cert.issuer = me();
    for (const auto& [content, agg] : variants) {
      cert.variants.push_back(agg);
    }
    emit(cert);
  };
  send_cert(VoteRole::propose, it->second.propose_variants);
  send_cert(VoteRole::no_propose, it->second.no_propose_variants);
}

}  // namespace angelfish
