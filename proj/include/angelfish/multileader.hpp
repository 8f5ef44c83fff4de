#pragma once

#include "angelfish/node.hpp"

namespace angelfish {

// Multi-leader protocol node. Each round has an ordered leader list whose
// head is the main leader; every listed leader must propose. Votes endorse
// all delivered leader vertices of the previous round and are rebroadcast
// once on first receipt, replacing the vote-certificate machinery. Parties
// entering a round announce, via no-vote messages, which of the previous
// round's leaders they missed; quorums of those form no-vote certificates
// that let a main leader skip secondary leaders it never delivered.
class MultiLeaderNode : public NodeCore {
 public:
  MultiLeaderNode(const ProtocolConfig& cfg, PartyId me, uint64_t run_seed,
                  uint32_t synthetic_txs_per_vertex, Outbox& out,
                  NodeObserver& obs);

  const std::vector<PartyId>& leaders_of(Round r) const;
  bool has_nvc(Round r, PartyId leader) const {
    return nvcs_.count({r, leader}) != 0;
  }

 protected:
  PartyId round_leader(Round r) const override;
  bool must_propose(Round r) const override;
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
  struct VoteTally {
    std::map<PartyId, Vote> votes;  // first vote accepted per source
    SignerSet sources;
  };

  void send_no_votes(Round r, SimTime now);
  void send_vote(Round r, SimTime now);
  void create_vertex(Round r, bool sequential, SimTime now);
  // Distinct parties whose round r+1 first messages or votes carry a
  // strong edge to the vertex with this id.
  SignerSet commit_support(Round r, const Digest& id) const;
  // Length of the delivered prefix of round r's leader list.
  size_t delivered_prefix(Round r) const;
  // Same prefix as the next-round vertex would actually reference, which
  // in the strong-edge case stops at the first no-voted leader.
  size_t referenced_prefix(Round r, bool strong_case) const;
  // Main leader creation gate: previous-round anchor resolvable and its
  // leader list either fully covered or certifiably cut short.
  bool main_chain_ready(Round r) const;
  void commit_leaders(Round r, std::vector<const Vertex*> cls, SimTime now);
  bool is_listed_leader(const Vertex& v) const;

  mutable std::map<Round, std::vector<PartyId>> leader_cache_;
  std::map<Round, VoteTally> votes_;
  std::map<std::pair<Round, PartyId>, AggregateSignature> no_vote_sigs_;
  std::map<std::pair<Round, PartyId>, NoVoteCertificate> nvcs_;
  // No-votes this node sent; those leaders stay out of later strong edges.
  std::set<std::pair<Round, PartyId>> no_vote_sent_;
  std::optional<Round> pending_vertex_;
  bool pending_jumped_ = false;
};

}  // namespace angelfish
