#pragma once

// Shared node-level test fixtures: an Outbox/NodeObserver capture sink and
// crafted-message builders for driving a node directly.

#include <optional>
#include <tuple>
#include <vector>

#include "angelfish/multileader.hpp"
#include "angelfish/node.hpp"

namespace angelfish::testing {

struct Capture : Outbox, NodeObserver {
  struct Sent {
    std::optional<PartyId> dst;
    Message msg;
  };
  std::vector<Sent> sent;
  std::vector<std::pair<Round, SimTime>> timers;

  struct Entered {
    Round r;
    bool via_leader;
    bool jumped;
  };
  std::vector<Entered> entered;
  std::vector<Vertex> created;
  std::vector<size_t> created_vp, created_prev;
  std::vector<bool> created_seq;
  std::vector<Round> timeouts, tc_rounds;
  std::vector<std::pair<Round, PartyId>> direct_commits;
  std::vector<std::tuple<Round, PartyId, bool>> leader_commits;
  std::vector<Vertex> adelivered;
  std::vector<std::pair<Round, PartyId>> invalid;

  void multicast(Message m) override {
    sent.push_back({std::nullopt, std::move(m)});
  }
  void unicast(PartyId d, Message m) override {
    sent.push_back({d, std::move(m)});
  }
  void set_timer(Round r, SimTime deadline) override {
    timers.push_back({r, deadline});
  }

  void on_round_entered(PartyId, Round r, SimTime, bool via_leader,
                        bool jumped) override {
    entered.push_back({r, via_leader, jumped});
  }
  void on_vertex_created(PartyId, const Vertex& v, const Digest&, SimTime,
                         bool sequential, size_t vp, size_t prev) override {
    created.push_back(v);
    created_seq.push_back(sequential);
    created_vp.push_back(vp);
    created_prev.push_back(prev);
  }
  void on_timeout_sent(PartyId, Round r, SimTime) override {
    timeouts.push_back(r);
  }
  void on_tc_formed(PartyId, Round r, SimTime) override {
    tc_rounds.push_back(r);
  }
  void on_direct_commit(PartyId, Round r, PartyId leader, const Digest&,
                        SimTime) override {
    direct_commits.push_back({r, leader});
  }
  void on_leader_committed(PartyId, Round r, PartyId leader, const Digest&,
                           bool direct, SimTime) override {
    leader_commits.push_back({r, leader, direct});
  }
  void on_a_deliver(PartyId, const Vertex& v, const Digest&, SimTime) override {
    adelivered.push_back(v);
  }
  void on_invalid_vertex(PartyId, Round r, PartyId origin, SimTime) override {
    invalid.push_back({r, origin});
  }

  template <typename T>
  size_t count_sent() const {
    size_t c = 0;
    for (const auto& s : sent)
      if (std::holds_alternative<T>(s.msg)) ++c;
    return c;
  }
};

// Re-exposes protected tallies of either node flavor for white-box checks.
template <class Base>
struct Exposed : Base {
  using Base::Base;
  using NodeCore::max_round_seen;
  using NodeCore::note_proposer;
  using NodeCore::proposer_count;
};

inline Vote mk_vote(Round r, PartyId src, bool propose,
                    std::vector<Digest> edges = {}) {
  Vote vt;
  vt.round = r;
  vt.source = src;
  vt.propose = propose;
  vt.strong_edges = edges;
  vt.sig = sign(src, vote_content_digest(r, propose, edges));
  return vt;
}

inline TimeoutMessage mk_timeout(Round r, PartyId src) {
  TimeoutMessage tm;
  tm.round = r;
  tm.source = src;
  tm.sig = sign(src, timeout_content_digest(r));
  return tm;
}

inline TimeoutCertificate mk_tc(Round r,
                                std::initializer_list<PartyId> signers) {
  std::vector<Signature> sigs;
  for (PartyId p : signers) sigs.push_back(sign(p, timeout_content_digest(r)));
  TimeoutCertificate tc;
  tc.round = r;
  tc.agg = aggregate(sigs);
  return tc;
}

inline NoVoteMessage mk_no_vote(Round r, PartyId leader, PartyId src) {
  NoVoteMessage nv;
  nv.round = r;
  nv.leader = leader;
  nv.source = src;
  nv.sig = sign(src, no_vote_content_digest(r, leader));
  return nv;
}

inline Vertex mk_vertex(Round r, PartyId source,
                        std::vector<Digest> strong = {}, bool propose = true) {
  Vertex v;
  v.round = r;
  v.source = source;
  v.propose = propose;
  v.block.txs.push_back(Tx{(uint64_t(source) << 32) | r, 0});
  v.strong_edges = std::move(strong);
  return v;
}

// Pushes a vertex through the node's reliable-broadcast input: a quorum of
// distinct ready messages both surfaces the first message and delivers
// (the node's engine must be in its default three-step mode).
inline void deliver(NodeCore& node, const Vertex& v, SimTime now = 0) {
  RbcMsg ready;
  ready.kind = WireKind::rbc_ready;
  ready.round = v.round;
  ready.origin = v.source;
  ready.payload = encode_vertex(v);
  for (PartyId src = 0; src < 5; ++src) node.on_message(src, ready, now);
}

}  // namespace angelfish::testing
