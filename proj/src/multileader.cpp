#include "angelfish/multileader.hpp"

#include <algorithm>
#include <cassert>

namespace angelfish {

MultiLeaderNode::MultiLeaderNode(const ProtocolConfig& cfg, PartyId me,
                                 uint64_t run_seed,
                                 uint32_t synthetic_txs_per_vertex,
                                 Outbox& out, NodeObserver& obs)
    : NodeCore(cfg, me, run_seed, synthetic_txs_per_vertex, out, obs) {}

const std::vector<PartyId>& MultiLeaderNode::leaders_of(Round r) const {
  auto it = leader_cache_.find(r);
  if (it == leader_cache_.end()) {
    it = leader_cache_.emplace(r, multiple_leaders_of(r, cfg())).first;
  }
  return it->second;
}

PartyId MultiLeaderNode::round_leader(Round r) const {
  return leaders_of(r)[0];
}

bool MultiLeaderNode::must_propose(Round r) const {
  const auto& ls = leaders_of(r);
  return std::find(ls.begin(), ls.end(), me()) != ls.end();
}

bool MultiLeaderNode::is_listed_leader(const Vertex& v) const {
  const auto& ls = leaders_of(v.round);
  return std::find(ls.begin(), ls.end(), v.source) != ls.end();
}

bool MultiLeaderNode::accept_vertex(const Vertex& v,
                                    const DagStore& dag) const {
  const bool is_main = (v.source == round_leader(v.round));
  if (!is_main) {
    // Secondary leaders propose ordinary-shaped vertices.
    return v.leader_edges.empty() && v.tcs.empty() && !v.nvc.has_value();
  }
  if (v.round == 1) {
    return v.leader_edges.empty() && v.tcs.empty() && !v.nvc.has_value();
  }
  const size_t k = cfg().leaders_per_round;
  // Resolve the anchor round this vertex chains from and the covered
  // prefix of that round's leader list.
  Round anchor = 0;
  size_t prefix = 0;
  const auto& prev = leaders_of(v.round - 1);
  bool strong_to_main = false;
  for (const auto& t : v.strong_edges) {
    const Vertex* u = dag.get_by_id(t);
    if (u && u->round == v.round - 1 && u->source == prev[0]) {
      strong_to_main = true;
      break;
    }
  }
  if (strong_to_main) {
    if (!v.leader_edges.empty() || !v.tcs.empty()) return false;
    anchor = v.round - 1;
    while (prefix < k) {
      const PartyId want = prev[prefix];
      bool covered = false;
      for (const auto& t : v.strong_edges) {
        const Vertex* u = dag.get_by_id(t);
        if (u && u->round == anchor && u->source == want) {
          covered = true;
          break;
        }
      }
      if (!covered) break;
      ++prefix;
    }
  } else if (!v.leader_edges.empty()) {
    const Vertex* head = dag.get_by_id(v.leader_edges[0]);
    if (!head) return false;
    anchor = head->round;
    const auto& listed = leaders_of(anchor);
    if (v.leader_edges.size() > k) return false;
    for (size_t i = 0; i < v.leader_edges.size(); ++i) {
      const Vertex* u = dag.get_by_id(v.leader_edges[i]);
      if (!u || u->round != anchor || u->source != listed[i]) return false;
    }
    prefix = v.leader_edges.size();
    Round expect = anchor + 1;
    for (const auto& tc : v.tcs) {
      if (tc.round != expect || !tc_valid(tc, cfg())) return false;
      ++expect;
    }
    if (expect != v.round) return false;
  } else {
    // No main leader vertex ever delivered: certificates all the way back.
    Round expect = 1;
    for (const auto& tc : v.tcs) {
      if (tc.round != expect || !tc_valid(tc, cfg())) return false;
      ++expect;
    }
    if (expect != v.round) return false;
    return !v.nvc.has_value();
  }
  if (prefix == 0) return false;  // must cover at least the main leader
  if (prefix < k) {
    if (!v.nvc.has_value()) return false;
    const auto& listed = leaders_of(anchor);
    if (v.nvc->round != anchor || v.nvc->leader != listed[prefix]) {
      return false;
    }
    if (!nvc_valid(*v.nvc, cfg())) return false;
  } else if (v.nvc.has_value()) {
    return false;  // full coverage leaves nothing to excuse
  }
  return true;
}

SignerSet MultiLeaderNode::vote_support(Round r) const {
  auto it = votes_.find(r);
  return it == votes_.end() ? SignerSet{} : it->second.sources;
}

void MultiLeaderNode::handle_vote(PartyId src, const Vote& vt, SimTime now) {
  (void)src;
  (void)now;
  if (vt.round < 1 || vt.source >= cfg().n) return;
  if (vt.sig.signer != vt.source) return;
  if (vt.round == 1 && !vt.strong_edges.empty()) return;
  if (vt.strong_edges.size() > cfg().leaders_per_round) return;
  if (!verify(vt.sig,
              vote_content_digest(vt.round, vt.propose, vt.strong_edges))) {
    return;
  }
  if (vt.round >= 2) {
    const auto& prev = leaders_of(vt.round - 1);
    for (const auto& t : vt.strong_edges) {
      const Vertex* u = dag().get_by_id(t);
      if (!u) continue;  // unknown targets get the benefit of the doubt
      if (u->round != vt.round - 1 ||
          std::find(prev.begin(), prev.end(), u->source) == prev.end()) {
        return;
      }
    }
  }
  auto& tally = votes_[vt.round];
  if (!tally.votes.emplace(vt.source, vt).second) return;
  tally.sources.insert(vt.source);
  if (vt.propose) note_proposer(vt.round, vt.source);
  saw_round(vt.round);
  if (vt.source != me()) emit(vt);  // relay each accepted vote once
}

void MultiLeaderNode::handle_vote_cert(const VoteCertificate&, SimTime) {
  // Vote rebroadcast replaces certificates in multi-leader mode.
}

void MultiLeaderNode::handle_no_vote(const NoVoteMessage& nv, SimTime now) {
  if (nv.round < 1 || nv.source >= cfg().n || nv.leader >= cfg().n) return;
  if (nv.sig.signer != nv.source) return;
  const auto& listed = leaders_of(nv.round);
  if (std::find(listed.begin(), listed.end(), nv.leader) == listed.end()) {
    return;
  }
  if (!verify(nv.sig, no_vote_content_digest(nv.round, nv.leader))) return;
  saw_round(nv.round);
  const auto key = std::make_pair(nv.round, nv.leader);
  auto& agg = no_vote_sigs_[key];
  if (agg.signers.contains(nv.source)) return;
  aggregate_insert(agg, nv.sig);
  if (agg.signers.size() >= cfg().quorum() && !nvcs_.count(key)) {
    NoVoteCertificate nvc;
    nvc.round = nv.round;
    nvc.leader = nv.leader;
    nvc.agg = agg;
    nvcs_.emplace(key, std::move(nvc));
    (void)now;
  }
}

void MultiLeaderNode::note_vertex(const Vertex&, SimTime) {}

SignerSet MultiLeaderNode::commit_support(Round r, const Digest& id) const {
  SignerSet s = first_message_support(r + 1, id);
  auto it = votes_.find(r + 1);
  if (it != votes_.end()) {
    for (const auto& [source, vt] : it->second.votes) {
      if (std::find(vt.strong_edges.begin(), vt.strong_edges.end(), id) !=
          vt.strong_edges.end()) {
        s.insert(source);
      }
    }
  }
  return s;
}

size_t MultiLeaderNode::delivered_prefix(Round r) const {
  const auto& listed = leaders_of(r);
  size_t x = 0;
  while (x < listed.size() && dag().get(r, listed[x]) != nullptr) ++x;
  return x;
}

// Prefix of round r's leader list this node may reference from the next
// round. Strong edges must skip leaders this node no-voted, so the strong
// case cuts the prefix there; leader edges carry no commit weight and may
// span them.
size_t MultiLeaderNode::referenced_prefix(Round r, bool strong_case) const {
  const auto& listed = leaders_of(r);
  size_t x = 0;
  while (x < listed.size()) {
    if (dag().get(r, listed[x]) == nullptr) break;
    if (strong_case && no_vote_sent_.count({r, listed[x]})) break;
    ++x;
  }
  return x;
}

bool MultiLeaderNode::try_commit(SimTime now) {
  bool progressed = false;
  for (Round r = committed_round() + 1; r <= max_round_seen(); ++r) {
    const auto& listed = leaders_of(r);
    std::vector<const Vertex*> cls;
    for (PartyId leader : listed) {
      const Vertex* u = dag().get(r, leader);
      if (!u) break;
      const Digest id = dag().id_of(*u);
      if (commit_support(r, id).size() < cfg().quorum()) break;
      cls.push_back(u);
    }
    if (cls.empty()) continue;
    for (const Vertex* u : cls) {
      observer().on_direct_commit(me(), r, u->source, dag().id_of(*u), now);
    }
    commit_leaders(r, std::move(cls), now);
    progressed = true;
  }
  return progressed;
}

void MultiLeaderNode::commit_leaders(Round r, std::vector<const Vertex*> cls,
                                     SimTime now) {
  std::vector<std::vector<const Vertex*>> walk;
  const Vertex* cur = cls[0];
  walk.push_back(std::move(cls));
  auto is_lead = [this](const Vertex& v) { return is_listed_leader(v); };
  for (Round rr = r; rr-- > committed_round() + 1;) {
    std::vector<const Vertex*> cmv;
    for (PartyId leader : leaders_of(rr)) {
      const Vertex* u = dag().get(rr, leader);
      if (!u) break;
      if (!dag().leader_path(dag().id_of(*cur), dag().id_of(*u), is_lead)) {
        break;
      }
      cmv.push_back(u);
    }
    if (!cmv.empty()) {
      cur = cmv[0];
      walk.push_back(std::move(cmv));
    }
  }
  set_committed_round(r);
  order_vertices(walk, r, now);
}

void MultiLeaderNode::propose_phase(Round r, bool jumped, SimTime now) {
  if (r >= 2) send_no_votes(r - 1, now);
  if (wants_vertex(r)) {
    pending_vertex_ = r;
    pending_jumped_ = jumped;
    flush_pending(now);
  } else {
    send_vote(r, now);
  }
}

void MultiLeaderNode::send_no_votes(Round r, SimTime now) {
  for (PartyId leader : leaders_of(r)) {
    if (dag().get(r, leader) != nullptr) continue;
    const auto key = std::make_pair(r, leader);
    if (!no_vote_sent_.insert(key).second) continue;
    NoVoteMessage nv;
    nv.round = r;
    nv.leader = leader;
    nv.source = me();
    nv.sig = sign(me(), no_vote_content_digest(r, leader));
    emit(nv);
  }
  (void)now;
}

bool MultiLeaderNode::main_chain_ready(Round r) const {
  const bool strong_ok = lead_vertex_delivered(r - 1) &&
                         !sent_timeout(r - 1) &&
                         !no_vote_sent_.count({r - 1, round_leader(r - 1)});
  Round anchor;
  if (strong_ok) {
    anchor = r - 1;
  } else {
    anchor = last_lead_round_below(r - 1);
    if (!tc_chain(anchor, r - 1)) return false;
  }
  if (anchor == 0) return true;
  const size_t x = referenced_prefix(anchor, strong_ok);
  if (x >= cfg().leaders_per_round) return true;
  return nvcs_.count({anchor, leaders_of(anchor)[x]}) != 0;
}

bool MultiLeaderNode::flush_pending(SimTime now) {
  if (!pending_vertex_) return false;
  const Round r = *pending_vertex_;
  if (r != current_round()) {
    pending_vertex_.reset();
    return false;
  }
  if (!pending_jumped_ && r >= 2) {
    const size_t vp = proposer_count(r - 2);
    const size_t need = vp > cfg().f ? vp - cfg().f : 0;
    if (dag().round_size(r - 1) < need) return false;
  }
  if (me() == round_leader(r) && r >= 2 && !main_chain_ready(r)) {
    return false;
  }
  const bool sequential = !pending_jumped_;
  pending_vertex_.reset();
  create_vertex(r, sequential, now);
  return true;
}

void MultiLeaderNode::create_vertex(Round r, bool sequential, SimTime now) {
  Vertex v;
  v.round = r;
  v.source = me();
  if (r >= 2) {
    const bool drop_main = sent_timeout(r - 1);
    const PartyId prev_main = round_leader(r - 1);
    for (const Vertex* u : dag().round_vertices(r - 1)) {
      if (drop_main && u->source == prev_main) continue;
      // Leaders this node explicitly no-voted stay unreferenced.
      if (no_vote_sent_.count({r - 1, u->source})) continue;
      v.strong_edges.push_back(dag().id_of(*u));
    }
  }
  if (me() == round_leader(r) && r >= 2) {
    const bool strong_ok = lead_vertex_delivered(r - 1) &&
                           !sent_timeout(r - 1) &&
                           !no_vote_sent_.count({r - 1, round_leader(r - 1)});
    Round anchor;
    if (strong_ok) {
      anchor = r - 1;
    } else {
      anchor = last_lead_round_below(r - 1);
      auto chain = tc_chain(anchor, r - 1);
      assert(chain.has_value());
      v.tcs = std::move(*chain);
      if (anchor >= 1) {
        const auto& listed = leaders_of(anchor);
        for (PartyId leader : listed) {
          const Vertex* u = dag().get(anchor, leader);
          if (!u) break;
          v.leader_edges.push_back(dag().id_of(*u));
        }
      }
    }
    if (anchor >= 1) {
      const size_t x = referenced_prefix(anchor, strong_ok);
      if (x < cfg().leaders_per_round) {
        auto it = nvcs_.find({anchor, leaders_of(anchor)[x]});
        assert(it != nvcs_.end());
        v.nvc = it->second;
      }
    }
  }
  v.propose = announce_propose(r + 1);
  v.block = next_block(now);
  std::vector<Digest> covered = v.strong_edges;
  covered.insert(covered.end(), v.leader_edges.begin(), v.leader_edges.end());
  v.weak_edges = dag().compute_weak_edges(r, covered);
  emit_vertex(v, sequential, now);
}

void MultiLeaderNode::send_vote(Round r, SimTime now) {
  (void)now;
  Vote vt;
  vt.round = r;
  vt.source = me();
  vt.propose = announce_propose(r + 1);
  if (r >= 2 && !sent_timeout(r - 1) && lead_vertex_delivered(r - 1)) {
    for (PartyId leader : leaders_of(r - 1)) {
      const Vertex* u = dag().get(r - 1, leader);
      if (u && !no_vote_sent_.count({r - 1, leader})) {
        vt.strong_edges.push_back(dag().id_of(*u));
      }
    }
  }
  vt.sig = sign(me(), vote_content_digest(vt.round, vt.propose,
                                          vt.strong_edges));
  emit(vt);
}

void MultiLeaderNode::pre_advance(Round, SimTime) {
  // No vote certificates in multi-leader mode.
}

void MultiLeaderNode::abandon_pending(Round r, SimTime now) {
  if (!pending_vertex_ || *pending_vertex_ != r) return;
  pending_vertex_.reset();
  send_vote(r, now);
}

}  // namespace angelfish
