#pragma once

#include "angelfish/encoding.hpp"

namespace angelfish {

// Transport surface a node emits into. Multicast reaches every party
// including the sender (self-delivery at zero network delay).
class Outbox {
 public:
  virtual void multicast(Message msg) = 0;
  virtual void unicast(PartyId dst, Message msg) = 0;
  // One-shot wakeup; the token is the round the timer was armed for.
  virtual void set_timer(Round round, SimTime deadline) = 0;
  virtual ~Outbox() = default;
};

// Protocol-level happenings a node reports. The simulator turns these into
// trace records and metric samples; tests assert on them directly.
class NodeObserver {
 public:
  virtual void on_round_entered(PartyId node, Round r, SimTime now,
                                bool via_leader, bool jumped) {
    (void)node; (void)r; (void)now; (void)via_leader; (void)jumped;
  }
  virtual void on_vertex_created(PartyId node, const Vertex& v,
                                 const Digest& id, SimTime now,
                                 bool sequential_entry,
                                 size_t proposer_count_at_creation,
                                 size_t prev_round_size_at_creation) {
    (void)node; (void)v; (void)id; (void)now; (void)sequential_entry;
    (void)proposer_count_at_creation; (void)prev_round_size_at_creation;
  }
  virtual void on_timeout_sent(PartyId node, Round r, SimTime now) {
    (void)node; (void)r; (void)now;
  }
  virtual void on_tc_formed(PartyId node, Round r, SimTime now) {
    (void)node; (void)r; (void)now;
  }
  // A leader vertex gained a committing quorum at this node.
  virtual void on_direct_commit(PartyId node, Round r, PartyId leader,
                                const Digest& id, SimTime now) {
    (void)node; (void)r; (void)leader; (void)id; (void)now;
  }
  // Every leader vertex ordered by the commit walk, lowest round first;
  // direct marks the quorum-carrying round itself.
  virtual void on_leader_committed(PartyId node, Round r, PartyId leader,
                                   const Digest& id, bool direct,
                                   SimTime now) {
    (void)node; (void)r; (void)leader; (void)id; (void)direct; (void)now;
  }
  virtual void on_a_deliver(PartyId node, const Vertex& v, const Digest& id,
                            SimTime now) {
    (void)node; (void)v; (void)id; (void)now;
  }
  // Reliable broadcast handed up a payload for (origin, round), before any
  // protocol-level validity filtering.
  virtual void on_rbc_delivered(PartyId node, Round r, PartyId origin,
                                const Digest& payload_digest, SimTime now) {
    (void)node; (void)r; (void)origin; (void)payload_digest; (void)now;
  }
  virtual void on_equivocation(PartyId node, Round r, PartyId origin,
                               SimTime now) {
    (void)node; (void)r; (void)origin; (void)now;
  }
  virtual void on_invalid_vertex(PartyId node, Round r, PartyId origin,
                                 SimTime now) {
    (void)node; (void)r; (void)origin; (void)now;
  }
  virtual ~NodeObserver() = default;
};

}  // namespace angelfish
