#pragma once

#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "angelfish/multileader.hpp"
#include "angelfish/node.hpp"

namespace angelfish {

// Message delay assignment. All models respect the partial-synchrony
// contract: anything sent at or after GST lands within delta_cap, and
// anything in flight at GST lands by GST + delta_cap.
enum class DelayModel : uint8_t {
  fixed,        // every hop takes exactly delta_min
  jitter,       // uniform in [delta_min, delta_cap], seeded
  adversarial,  // pre-GST: parked anywhere up to the GST + delta_cap
                // horizon; post-GST: delta_min (fastest legal schedule)
};

const char* delay_model_name(DelayModel m);
std::optional<DelayModel> delay_model_from_name(const std::string& name);

struct SimParams {
  DelayModel delay_model = DelayModel::fixed;
  SimTime delta_min = 1;  // one hop under the fixed model
  SimTime delta_cap = 2;  // post-GST worst-case hop
  SimTime gst = 0;
  bool multileader = false;
  uint32_t txs_per_vertex = 1;  // synthetic payload when no block is queued
};

// Scripted misbehavior, applied to a node's outbound traffic. The node
// itself runs honest code; the network mangles what it emits, so every
// behavior stays within the no-signature-forgery model boundary.
enum class ByzBehavior : uint8_t {
  equivocate_vertex,   // divergent vertex payloads to the two receiver halves
  withhold_vertex,     // initial vertex send suppressed to one half
  false_propose_flag,  // propose flags contradict across receiver halves
  premature_vote,      // extra votes for rounds not yet entered
  silent,              // emits nothing at all
};

const char* byz_behavior_name(ByzBehavior b);
std::optional<ByzBehavior> byz_behavior_from_name(const std::string& name);

struct FaultScript {
  std::map<PartyId, SimTime> crashes;  // party stops dead at this time
  std::map<PartyId, ByzBehavior> byzantine;

  // Distinct faulty parties; must stay at or under f for the protocol's
  // guarantees to be meaningful.
  size_t fault_count() const;
};

enum class TraceKind : uint8_t {
  send,
  deliver,
  rbc_deliver,
  round_enter,
  vertex_created,
  timeout_sent,
  tc_formed,
  direct_commit,
  leader_commit,
  a_deliver,
  equivocation,
  invalid_vertex,
  crash,
  block_submitted,
};

const char* trace_kind_name(TraceKind k);

// One line of the run trace. peer is the counterparty where one exists
// (send destination, deliver source, committed leader id), -1 otherwise.
// a and b carry kind-specific extras:
//   send: a = wire bytes, b = wire kind tag in the low byte and the drawn
//     network delay above it (so delay bounds are checkable per record)
//   deliver: a = wire bytes, b = wire kind tag
//   vertex_created: a = proposer count two rounds back, b = previous round
//     size, both sampled at creation; peer = 1 on sequential entry
//   round_enter: a = 1 if entered on a leader vertex, b = 1 if jumped
//   leader_commit: a = 1 for the quorum-carrying round itself
//   a_deliver: a = transaction count, b = first transaction id
//   block_submitted: b = first transaction id
struct TraceRecord {
  SimTime time = 0;
  TraceKind kind = TraceKind::send;
  PartyId node = 0;
  int64_t peer = -1;
  Round round = 0;
  Digest digest{};
  uint64_t a = 0;
  uint64_t b = 0;

  bool operator==(const TraceRecord&) const = default;
};

// One line-delimited JSON record; digest is truncated to an 8-hex prefix.
std::string trace_record_json(const TraceRecord& rec);

struct StopRule {
  std::optional<SimTime> max_time;
  // Run until every healthy node's committed round reaches this.
  std::optional<Round> min_committed_round;
};

enum class StopReason : uint8_t {
  target_reached,
  time_limit,
  queue_drained,
  livelock,
};

const char* stop_reason_name(StopReason r);

struct RunResult {
  StopReason reason = StopReason::queue_drained;
  SimTime end_time = 0;
  bool livelock = false;
};

struct TrafficCounter {
  uint64_t messages = 0;
  uint64_t bytes = 0;
};

// Single-threaded discrete-event network driving one node per party.
// Identical (config, params, script, seed) reproduces the identical trace,
// byte for byte: the only randomness is a seeded stream consumed in event
// order, and event dispatch is totally ordered by (time, class, seq).
class SimNet : NodeObserver {
 public:
  SimNet(const ProtocolConfig& cfg, const SimParams& params,
         const FaultScript& script, uint64_t seed);
  ~SimNet() override;

  SimNet(const SimNet&) = delete;
  SimNet& operator=(const SimNet&) = delete;

  // Queues a client block for hand-off to the node at the given time.
  // Call before run(); injection is an ordinary queue event.
  void schedule_block(PartyId node, Block block, SimTime at);

  // Drives the event loop to the stop rule, queue exhaustion, or a
  // livelock flag. Call exactly once.
  RunResult run(const StopRule& stop);

  NodeCore& node(PartyId i) { return *nodes_[i]; }
  const NodeCore& node(PartyId i) const { return *nodes_[i]; }
  size_t node_count() const { return nodes_.size(); }
  // Neither scripted byzantine nor scripted to crash.
  bool healthy(PartyId i) const;
  bool crashed(PartyId i) const { return crashed_.count(i) != 0; }
  SimTime now() const { return now_; }

  const ProtocolConfig& config() const { return cfg_; }
  const SimParams& params() const { return params_; }
  const FaultScript& script() const { return script_; }

  const std::vector<TraceRecord>& trace() const { return trace_; }
  const std::map<Round, TrafficCounter>& traffic_by_round() const {
    return traffic_by_round_;
  }
  const std::map<WireKind, TrafficCounter>& traffic_by_kind() const {
    return traffic_by_kind_;
  }
  uint64_t total_messages() const { return total_.messages; }
  uint64_t total_bytes() const { return total_.bytes; }

 private:
  friend class NodeOutbox;

  struct QueuedEvent {
    SimTime at = 0;
    // Dispatch order within one instant: crashes land first, then block
    // hand-offs, then message deliveries, then timers. A delivery arriving
    // exactly at a timer's deadline therefore counts as within the bound.
    enum class Class : uint8_t { crash = 0, block = 1, message = 2, timer = 3 };
    Class klass = Class::message;
    uint64_t seq = 0;

    PartyId src = 0;
    PartyId dst = 0;
    Bytes payload;               // message
    Round round = 0;             // timer
    std::optional<Block> block;  // block hand-off
  };

  struct EventAfter {
    bool operator()(const QueuedEvent& l, const QueuedEvent& r) const {
      if (l.at != r.at) return l.at > r.at;
      if (l.klass != r.klass) return l.klass > r.klass;
      return l.seq > r.seq;
    }
  };

  // Outbox entry points (via NodeOutbox).
  void node_multicast(PartyId src, const Message& m);
  void node_unicast(PartyId src, PartyId dst, const Message& m);
  void node_set_timer(PartyId src, Round round, SimTime deadline);

  void send_one(PartyId src, PartyId dst, const Message& m);
  // Applies the sender's scripted behavior for this destination; returns
  // false when the message is suppressed.
  bool apply_behavior(PartyId src, PartyId dst, Message& m);
  void inject_premature_votes(PartyId src, const Message& m);
  SimTime draw_delay();
  uint64_t next_rand();
  void push(QueuedEvent ev);
  void dispatch(const QueuedEvent& ev);
  bool target_met(const StopRule& stop) const;
  void mark_crashed(PartyId i, SimTime at);
  void record(TraceRecord rec);

  // NodeObserver hooks; every protocol happening becomes a trace record.
  void on_round_entered(PartyId node, Round r, SimTime now, bool via_leader,
                        bool jumped) override;
  void on_vertex_created(PartyId node, const Vertex& v, const Digest& id,
                         SimTime now, bool sequential_entry,
                         size_t proposer_count_at_creation,
                         size_t prev_round_size_at_creation) override;
  void on_timeout_sent(PartyId node, Round r, SimTime now) override;
  void on_tc_formed(PartyId node, Round r, SimTime now) override;
  void on_direct_commit(PartyId node, Round r, PartyId leader,
                        const Digest& id, SimTime now) override;
  void on_leader_committed(PartyId node, Round r, PartyId leader,
                           const Digest& id, bool direct, SimTime now) override;
  void on_a_deliver(PartyId node, const Vertex& v, const Digest& id,
                    SimTime now) override;
  void on_rbc_delivered(PartyId node, Round r, PartyId origin,
                        const Digest& payload_digest, SimTime now) override;
  void on_equivocation(PartyId node, Round r, PartyId origin,
                       SimTime now) override;
  void on_invalid_vertex(PartyId node, Round r, PartyId origin,
                         SimTime now) override;

  ProtocolConfig cfg_;
  SimParams params_;
  FaultScript script_;

  std::vector<std::unique_ptr<Outbox>> outboxes_;
  std::vector<std::unique_ptr<NodeCore>> nodes_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, EventAfter>
      queue_;
  uint64_t next_seq_ = 0;
  SimTime now_ = 0;
  uint64_t rng_state_ = 0;
  std::set<PartyId> crashed_;
  std::set<std::pair<PartyId, Round>> premature_sent_;
  bool ran_ = false;

  std::vector<TraceRecord> trace_;
  std::map<Round, TrafficCounter> traffic_by_round_;
  std::map<WireKind, TrafficCounter> traffic_by_kind_;
  TrafficCounter total_;
};

}  // namespace angelfish
