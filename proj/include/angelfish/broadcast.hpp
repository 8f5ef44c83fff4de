#pragma once

#include <map>

#include "angelfish/encoding.hpp"

namespace angelfish {

// Observable events of one broadcast instance at one receiver.
//   first_message  earliest payload-bearing message for the instance; the
//                  commit rule counts these optimistically
//   delivered      the instance's reliable delivery (at most once)
//   equivocation   two distinct payloads surfaced for one (origin, round)
struct RbcEvent {
  enum class Kind { first_message, delivered, equivocation };
  Kind kind = Kind::first_message;
  Round round = 1;
  PartyId origin = 0;
  Bytes payload;
};

// Outbound transmission request. Empty dst means multicast to all parties
// including the sender itself.
struct RbcOut {
  std::optional<PartyId> dst;
  RbcMsg msg;
};

// Per-node engine running one reliable-broadcast instance per
// (origin, round). Three interchangeable modes:
//
//   bracha              send -> echo -> ready with the usual n-f / f+1
//                       amplification thresholds; three communication
//                       steps to deliver, safe against a Byzantine sender
//   two_step_certified  receivers ack the first send back to the origin,
//                       which multicasts the payload together with an
//                       n-f availability certificate; receivers forward
//                       the certified payload once so delivery agreement
//                       survives a sender that withholds the certificate
//   fast_path           receivers multicast a lightweight availability
//                       ack on first receipt; a party delivers once n-f
//                       parties (sender included) evidently hold the
//                       payload. Fault-free this is exactly one hop after
//                       the first message.
class RbcEngine {
 public:
  RbcEngine(RbcKind mode, PartyId me, uint32_t n, uint32_t f)
      : mode_(mode), me_(me), n_(n), f_(f) {}

  // Starts broadcasting our payload for `round`.
  void broadcast(Round round, Bytes payload, std::vector<RbcOut>& out);

  // Feeds one received message; src is the authenticated transport-level
  // sender. Emits protocol messages into `out` and events into `events`.
  void on_message(PartyId src, const RbcMsg& m, std::vector<RbcOut>& out,
                  std::vector<RbcEvent>& events);

  bool delivered(Round round, PartyId origin) const;
  bool equivocation_seen(Round round, PartyId origin) const;

  // Order-insensitive digest of the engine's entire mutable state. Two
  // engines that reached the same state through different message
  // interleavings fingerprint identically, which lets a model checker
  // deduplicate explored states.
  uint64_t state_fingerprint() const;

 private:
  struct Instance {
    bool first_emitted = false;
    bool delivered = false;
    bool equivocation = false;
    bool cert_forwarded = false;
    std::optional<Digest> echoed;      // value echoed/acked (first send seen)
    std::optional<Digest> ready_sent;
    bool cert_formed = false;          // origin side, certified mode
    std::map<Digest, Bytes> payloads;
    std::map<Digest, SignerSet> echoes;
    std::map<Digest, SignerSet> readys;
    std::map<Digest, AggregateSignature> acks;  // certified: signed acks
    std::map<Digest, SignerSet> avail;          // fast path availability
  };

  Instance& instance(Round round, PartyId origin) {
    return instances_[{round, origin}];
  }

  void note_payload(Instance& inst, Round round, PartyId origin,
                    const Bytes& payload, const Digest& digest,
                    std::vector<RbcEvent>& events);
  void deliver(Instance& inst, Round round, PartyId origin,
               const Digest& digest, std::vector<RbcEvent>& events);
  void check_fast_path(Instance& inst, Round round, PartyId origin,
                       std::vector<RbcEvent>& events);

  RbcKind mode_;
  PartyId me_;
  uint32_t n_;
  uint32_t f_;
  std::map<std::pair<Round, PartyId>, Instance> instances_;
};

}  // namespace angelfish
