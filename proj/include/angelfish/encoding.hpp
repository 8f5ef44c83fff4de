#pragma once

#include <variant>

#include "angelfish/types.hpp"

namespace angelfish {

// One-byte message kind tags. These version the canonical encoding: any
// change to a message layout must claim a fresh tag value.
enum class WireKind : uint8_t {
  vertex = 0x01,  // payload encoding carried inside RBC messages

  rbc_send = 0x10,
  rbc_echo = 0x11,
  rbc_ready = 0x12,
  rbc_ack = 0x13,
  rbc_cert = 0x14,

  vote = 0x20,
  timeout = 0x21,
  tc = 0x22,
  pvc = 0x23,
  npvc = 0x24,
  cvc = 0x25,
  no_vote = 0x26,
  nvc = 0x27,
};

const char* wire_kind_name(WireKind k);

// Envelope for one reliable-broadcast instance message. The instance is
// identified by (origin, round); payload bytes are the origin's canonical
// vertex encoding.
struct RbcMsg {
  WireKind kind = WireKind::rbc_send;
  Round round = 1;
  PartyId origin = 0;
  Bytes payload;                            // send/echo/ready/cert
  Digest digest;                            // ack: payload digest
  std::optional<Signature> ack_sig;         // ack (certified mode)
  std::optional<AggregateSignature> cert;   // cert

  bool operator==(const RbcMsg&) const = default;
};

using Message = std::variant<RbcMsg, Vote, TimeoutMessage, TimeoutCertificate,
                             VoteCertificate, NoVoteMessage, NoVoteCertificate>;

// Canonical encoding: kind tag, then fields in declaration order,
// little-endian fixed-width integers, length-prefixed sequences. Injective
// by construction; decode rejects trailing bytes so the two functions are
// exact inverses.
Bytes encode_message(const Message& msg);
Message decode_message(std::span<const uint8_t> data);

Bytes encode_vertex(const Vertex& v);
Vertex decode_vertex(std::span<const uint8_t> data);

// Identity of a vertex: digest of its full canonical encoding.
Digest vertex_id(const Vertex& v);

WireKind message_kind(const Message& msg);

}  // namespace angelfish
