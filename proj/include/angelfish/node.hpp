#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "angelfish/broadcast.hpp"
#include "angelfish/dag.hpp"
#include "angelfish/events.hpp"

namespace angelfish {

// Machinery shared by the single-leader and multi-leader nodes: reliable
// broadcast plumbing, the first-message registry, timeout and timeout
// certificate handling, the client block queue, the proposal policy coin,
// and the ordering walk that turns committed leader vertices into a total
// order. Protocol-specific behavior (vote handling, advancement support
// counting, vertex shape, commit rule) lives in the subclasses.
class NodeCore {
 public:
  virtual ~NodeCore() = default;

  // Enters round 1. Call exactly once before feeding messages.
  void start(SimTime now);
  void on_message(PartyId src, const Message& m, SimTime now);
  void on_timer(Round round, SimTime now);
  // Queues a client block; it rides in the next vertex this node creates.
  void a_bcast(Block b, SimTime now);

  Round current_round() const { return round_; }
  Round committed_round() const { return committed_round_; }
  const DagStore& dag() const { return dag_; }
  PartyId id() const { return me_; }
  // Vertices in a_deliver order.
  const std::vector<const Vertex*>& delivered_log() const { return ordered_log_; }
  bool sent_timeout(Round r) const { return timeout_sent_.count(r) != 0; }
  bool has_tc(Round r) const { return tcs_.count(r) != 0; }

 protected:
  NodeCore(const ProtocolConfig& cfg, PartyId me, uint64_t run_seed,
           uint32_t synthetic_txs_per_vertex, Outbox& out, NodeObserver& obs);

  // ---- mode hooks -------------------------------------------------------
  // First leader of the round: the only leader in single-leader mode, the
  // main leader in multi-leader mode. Timeouts and round advancement watch
  // this party's vertex.
  virtual PartyId round_leader(Round r) const = 0;
  // Whether this node is obligated to propose a vertex in round r (leader
  // duty); secondary leaders count in multi-leader mode.
  virtual bool must_propose(Round r) const { return round_leader(r) == me_; }
  // Validity check run by the DAG store once a vertex's targets resolve.
  virtual bool accept_vertex(const Vertex& v, const DagStore& dag) const = 0;
  // Distinct parties whose round-r votes (or vote certificates) this node
  // holds; unioned with round-r vertex sources for advancement support.
  virtual SignerSet vote_support(Round r) const = 0;
  virtual void handle_vote(PartyId src, const Vote& vt, SimTime now) = 0;
  virtual void handle_vote_cert(const VoteCertificate& cert, SimTime now) = 0;
  virtual void handle_no_vote(const NoVoteMessage& nv, SimTime now) = 0;
  // Called for every vertex accepted into the DAG (own and others').
  virtual void note_vertex(const Vertex& v, SimTime now) = 0;
  // Commit scan; returns true if committed_round_ moved.
  virtual bool try_commit(SimTime now) = 0;
  // Round-entry actions: send votes or schedule vertex creation.
  virtual void propose_phase(Round r, bool jumped, SimTime now) = 0;
  // Creation attempts for proposals parked behind a pacing or prefix wait.
  virtual bool flush_pending(SimTime now) = 0;
  // Emitted just before a sequential advance out of round r (vote
  // certificate rebroadcast in single-leader mode).
  virtual void pre_advance(Round r, SimTime now) = 0;
  // Round-r timer expiry with a vertex still parked: the creation gate may
  // be waiting on evidence that can no longer form (a timeout certificate
  // whose quorum is unreachable because enough parties saw the lead vertex
  // in time). Abandoning the vertex for a vote keeps the round's message
  // quorum reachable, so everyone times out, certifies the round, and the
  // next leader bridges over it.
  virtual void abandon_pending(Round r, SimTime now) = 0;

  // ---- shared services for subclasses -----------------------------------
  // Runs commit / advance / pending-creation to a fixpoint.
  void poll(SimTime now);
  void enter_round(Round r, bool via_leader, bool jumped, SimTime now);
  // Sends a vertex: into own DAG immediately, to everyone via RBC.
  void emit_vertex(const Vertex& v, bool sequential_entry, SimTime now);
  void emit(Message m) { out_.multicast(std::move(m)); }
  // Round r-1 vertices, party order, minus the lead vertex when this node
  // timed out on round r-1.
  std::vector<Digest> strong_edge_targets(Round r) const;
  // Timeout certificates for every round in (after, upto] that lacks a
  // delivered lead vertex, ascending. Returns nullopt if one is missing.
  std::optional<std::vector<TimeoutCertificate>> tc_chain(Round after,
                                                          Round upto) const;
  // Highest round with a delivered lead vertex below r, 0 if none.
  Round last_lead_round_below(Round r) const;
  // True when this node may advance past round r as next round's leader:
  // either LV_r is delivered, or TCs back to the last delivered lead vertex
  // show every skipped leader failed. (Non-leaders always pass.)
  bool leader_chain_ready(Round r) const;
  bool lead_vertex_delivered(Round r) const {
    return dag_.get(r, round_leader(r)) != nullptr;
  }
  const Vertex* lead_vertex(Round r) const {
    return dag_.get(r, round_leader(r));
  }
  void store_tc(const TimeoutCertificate& tc, SimTime now);
  // Whether the proposal policy says to create a vertex in round r.
  bool wants_vertex(Round r) const;
  // The propose flag to announce for the following round.
  bool announce_propose(Round next_round) const;
  Block next_block(SimTime now);
  // Orders the causal histories of a commit walk's leader lists. `walk`
  // holds per-round lists in walk order (highest round pushed first); they
  // are consumed in reverse so lower rounds order first. direct_round marks
  // the quorum-carrying round for observer flags.
  void order_vertices(const std::vector<std::vector<const Vertex*>>& walk,
                      Round direct_round, SimTime now);
  void set_committed_round(Round r) { committed_round_ = r; }
  size_t proposer_count(Round r) const;
  void note_proposer(Round r, PartyId p);
  Round max_round_seen() const { return max_round_seen_; }
  void saw_round(Round r);
  bool first_message_edges(Round r, PartyId source,
                           std::vector<Digest>* edges) const;
  // Parties whose round-r vertex first-message carried a strong edge to id.
  SignerSet first_message_support(Round r, const Digest& id) const;
  const ProtocolConfig& cfg() const { return cfg_; }
  PartyId me() const { return me_; }
  DagStore& dag_mut() { return dag_; }
  NodeObserver& observer() { return obs_; }
  bool pending_blocks() const { return !blocks_.empty(); }
  // Feeds a vertex into the local DAG (used for own vertices and RBC
  // deliveries alike; promotions and tallies follow automatically).
  void deliver_vertex(const Vertex& v, SimTime now);

 private:
  bool try_advance(SimTime now);
  void handle_rbc(PartyId src, const RbcMsg& m, SimTime now);
  void handle_timeout_msg(const TimeoutMessage& tm, SimTime now);
  void flush_rbc(std::vector<RbcOut>& outs);

  ProtocolConfig cfg_;
  PartyId me_;
  uint64_t policy_seed_;
  uint32_t synthetic_txs_;
  Outbox& out_;
  NodeObserver& obs_;
  RbcEngine rbc_;
  DagStore dag_;

  Round round_ = 0;
  Round committed_round_ = 0;
  Round max_round_seen_ = 1;

  // Timeouts this node sent, keyed by round; governs leader-edge exclusion.
  std::set<Round> timeout_sent_;
  std::map<Round, AggregateSignature> timeout_sigs_;
  std::map<Round, TimeoutCertificate> tcs_;
  std::set<Round> tc_sent_;  // rounds whose TC this node already multicast

  // First vertex message seen per (round, source): the strong edges it
  // carried. Feeds the commit rule before delivery completes.
  std::map<Round, std::map<PartyId, std::vector<Digest>>> first_msgs_;
  // Parties that announced (via vertex or vote propose flags in round r)
  // they will propose in round r+1.
  std::map<Round, SignerSet> proposers_;

  std::deque<Block> blocks_;
  uint64_t tx_counter_ = 0;
  std::set<Digest> ordered_;
  std::vector<const Vertex*> ordered_log_;
  bool in_poll_ = false;
};

// Single-leader protocol node. One leader vertex per round; lightweight
// votes stand in for vertices from parties that skip proposing; propose,
// no-propose, and commit vote certificates keep slow parties current.
class AngelfishNode : public NodeCore {
 public:
  AngelfishNode(const ProtocolConfig& cfg, PartyId me, uint64_t run_seed,
                uint32_t synthetic_txs_per_vertex, Outbox& out,
                NodeObserver& obs);

 protected:
  PartyId round_leader(Round r) const override;
  bool accept_vertex(const Vertex& v, const DagStore& dag) const override;
  SignerSet vote_support(Round r) const override;
  void handle_vote(PartyId src, const Vote& vt, SimTime now) override;
  void handle_vote_cert(const VoteCertificate& cert, SimTime now) override;
  void handle_no_vote(const NoVoteMessage& nv, SimTime now) override;
  void note_vertex(const Vertex& v, SimTime now) override;
  bool try_commit(SimTime now) override;
  void propose_phase(Round r, bool jumped, SimTime now) override;
  bool flush_pending(SimTime now) override;
  void pre_advance(Round r, SimTime now) override;
  void abandon_pending(Round r, SimTime now) override;

 private:
  struct RoundVotes {
    std::map<PartyId, Vote> votes;  // first vote accepted per source
    SignerSet sources;              // vote + vote-certificate signers
    // Aggregates per distinct signed content, split by propose flag.
    std::map<Digest, AggregateSignature> propose_variants;
    std::map<Digest, AggregateSignature> no_propose_variants;
  };

  void create_vertex(Round r, bool sequential, SimTime now);
  void send_vote(Round r, SimTime now);
  // Folds a certificate variant into the tallies if its content digest
  // matches a vote content this node can reconstruct.
  bool fold_variant(VoteRole role, Round round, const AggregateSignature& agg);
  void refold_pending(SimTime now);
  // Commit support for lead vertex v of round r: first messages, votes,
  // and commit certificates, as distinct sources.
  SignerSet commit_support(Round r, const Digest& lv_id) const;
  void maybe_send_commit_cert(Round r, const Digest& lv_id);
  void commit_leader(Round r, const Vertex* lv, SimTime now);

  std::map<Round, RoundVotes> votes_;
  // Commit endorsements learned from commit certificates, keyed by the
  // endorsed leader vertex's round.
  std::map<Round, SignerSet> commit_cert_sources_;
  std::map<Round, std::map<Digest, AggregateSignature>> commit_cert_variants_;
  // Certificates whose content digests were not yet recognizable (their
  // lead vertex still undelivered); retried on every lead delivery.
  std::vector<VoteCertificate> unresolved_certs_;
  std::set<Round> commit_cert_sent_;
  // Vertex creation parked behind the pacing or leader-chain gate.
  std::optional<Round> pending_vertex_;
  bool pending_jumped_ = false;
};

}  // namespace angelfish
