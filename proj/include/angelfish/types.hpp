#pragma once

#include <optional>
#include <vector>

#include "angelfish/crypto.hpp"

namespace angelfish {

// How per-round reliable broadcast instances deliver vertex payloads.
//   bracha             three-step echo/ready broadcast, tolerates a
//                      Byzantine sender
//   two_step_certified sender collects n-f acks into an availability
//                      certificate and multicasts it with the payload
//   fast_path          optimistic mesh of availability acks; first message
//                      arrives one hop after the send, delivery one hop
//                      after that (used for latency measurement runs)
enum class RbcKind { bracha, two_step_certified, fast_path };

struct ProtocolConfig {
  uint32_t n = 4;
  uint32_t f = 1;
  // Round timer when a round was entered after delivering the previous
  // leader vertex. Entering any other way uses ceil(2.5x) of this, which
  // makes the pair {2D, 5D} when the timer is configured as twice the
  // network delay bound.
  SimTime timeout_tau = 4;
  RbcKind rbc_kind = RbcKind::bracha;
  // 0 selects plain round-robin; anything else keys a pseudo-random
  // schedule.
  uint64_t leader_schedule_seed = 0;
  uint32_t leaders_per_round = 1;
  double propose_rate = 1.0;

  void validate() const;

  SimTime slow_timeout() const { return (timeout_tau * 5 + 1) / 2; }
  uint32_t quorum() const { return n - f; }
};

// Leader (index 0 of the per-round list) and the full ordered leader list.
PartyId leader_of(Round r, const ProtocolConfig& cfg);
std::vector<PartyId> multiple_leaders_of(Round r, const ProtocolConfig& cfg);

struct Tx {
  uint64_t id = 0;
  SimTime created_at = 0;

  bool operator==(const Tx&) const = default;
};

struct Block {
  std::vector<Tx> txs;

  bool operator==(const Block&) const = default;
};

struct TimeoutCertificate {
  Round round = 0;
  AggregateSignature agg;

  bool operator==(const TimeoutCertificate&) const = default;
};

struct NoVoteCertificate {
  Round round = 0;
  PartyId leader = 0;
  AggregateSignature agg;

  bool operator==(const NoVoteCertificate&) const = default;
};

struct Vertex {
  Round round = 1;
  PartyId source = 0;
  // Announces intent to propose a vertex in round round+1; feeds the
  // proposer tally the next round's vertex creation waits on.
  bool propose = false;
  Block block;
  // All at round-1 (round 1 vertices have none).
  std::vector<Digest> strong_edges;
  // Targets at rounds <= round-2, added to keep the causal history complete.
  std::vector<Digest> weak_edges;
  // Leader vertices only. Single leader mode uses at most one target; with
  // multiple leaders per round this holds the delivered prefix of an
  // earlier round's leader list. All targets sit in one round <= round-2.
  std::vector<Digest> leader_edges;
  // One certificate per leaderless round between the leader-edge target
  // round and round-1.
  std::vector<TimeoutCertificate> tcs;
  // Multi-leader only: certificate for the first undelivered leader of the
  // leader-edge target round (or of round-1 when reached by strong edge).
  std::optional<NoVoteCertificate> nvc;

  bool operator==(const Vertex&) const = default;
};

struct Vote {
  Round round = 1;
  PartyId source = 0;
  bool propose = false;
  // Single leader mode: empty, or exactly the previous round's leader
  // vertex. Multi-leader mode: every delivered leader vertex of the
  // previous round, and only when the main leader vertex is among them.
  std::vector<Digest> strong_edges;
  Signature sig;

  bool operator==(const Vote&) const = default;
};

struct TimeoutMessage {
  Round round = 1;
  PartyId source = 0;
  Signature sig;

  bool operator==(const TimeoutMessage&) const = default;
};

struct NoVoteMessage {
  Round round = 1;
  PartyId leader = 0;
  PartyId source = 0;
  Signature sig;

  bool operator==(const NoVoteMessage&) const = default;
};

enum class VoteRole : uint8_t { propose = 0, no_propose = 1, commit = 2 };

// Certificate over a round's votes sharing one role. Votes with identical
// content aggregate into one entry; distinct contents (propose flag or
// edge set differences) stay separate, so signer sets are pairwise
// disjoint for an honest issuer.
struct VoteCertificate {
  VoteRole role = VoteRole::propose;
  // Round of the underlying votes for propose/no_propose. For commit
  // certificates this is the round of the endorsed leader vertex; the
  // votes themselves are from the following round.
  Round round = 1;
  PartyId issuer = 0;
  std::vector<AggregateSignature> variants;

  bool operator==(const VoteCertificate&) const = default;
};

// Digests the simulated signatures commit to. Domain-separated by a kind
// byte so a vote can never collide with a timeout or no-vote.
Digest vote_content_digest(Round r, bool propose,
                           const std::vector<Digest>& strong_edges);
Digest timeout_content_digest(Round r);
Digest no_vote_content_digest(Round r, PartyId leader);

inline bool tc_valid(const TimeoutCertificate& tc, const ProtocolConfig& cfg) {
  return tc.agg.signers.size() >= cfg.quorum() &&
         verify_aggregate(tc.agg, timeout_content_digest(tc.round), cfg.n);
}

inline bool nvc_valid(const NoVoteCertificate& nvc, const ProtocolConfig& cfg) {
  return nvc.agg.signers.size() >= cfg.quorum() &&
         verify_aggregate(nvc.agg, no_vote_content_digest(nvc.round, nvc.leader),
                          cfg.n);
}

}  // namespace angelfish
