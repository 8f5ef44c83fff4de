#include "angelfish/encoding.hpp"

namespace angelfish {

namespace {

void put_digest(ByteWriter& w, const Digest& d) {
  w.raw(d.bytes.data(), d.bytes.size());
}

Digest get_digest(ByteReader& r) {
  Digest d;
  r.raw(d.bytes.data(), d.bytes.size());
  return d;
}

void put_digests(ByteWriter& w, const std::vector<Digest>& ds) {
  w.u32(uint32_t(ds.size()));
  for (const auto& d : ds) put_digest(w, d);
}

std::vector<Digest> get_digests(ByteReader& r) {
  uint32_t n = r.u32();
  std::vector<Digest> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; i++) out.push_back(get_digest(r));
  return out;
}

void put_sig(ByteWriter& w, const Signature& s) {
  w.u32(s.signer);
  put_digest(w, s.content);
}

Signature get_sig(ByteReader& r) {
  Signature s;
  s.signer = r.u32();
  s.content = get_digest(r);
  return s;
}

void put_agg(ByteWriter& w, const AggregateSignature& a) {
  put_digest(w, a.content);
  w.u32(uint32_t(a.signers.size()));
  for (PartyId p : a.signers) w.u32(p);
}

AggregateSignature get_agg(ByteReader& r) {
  AggregateSignature a;
  a.content = get_digest(r);
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; i++) a.signers.insert(r.u32());
  return a;
}

void put_tc(ByteWriter& w, const TimeoutCertificate& tc) {
  w.u64(tc.round);
  put_agg(w, tc.agg);
}

TimeoutCertificate get_tc(ByteReader& r) {
  TimeoutCertificate tc;
  tc.round = r.u64();
  tc.agg = get_agg(r);
  return tc;
}

void put_nvc(ByteWriter& w, const NoVoteCertificate& c) {
  w.u64(c.round);
  w.u32(c.leader);
  put_agg(w, c.agg);
}

NoVoteCertificate get_nvc(ByteReader& r) {
  NoVoteCertificate c;
  c.round = r.u64();
  c.leader = r.u32();
  c.agg = get_agg(r);
  return c;
}

void put_block(ByteWriter& w, const Block& b) {
  w.u32(uint32_t(b.txs.size()));
  for (const auto& tx : b.txs) {
    w.u64(tx.id);
    w.i64(tx.created_at);
  }
}

Block get_block(ByteReader& r) {
  Block b;
  uint32_t n = r.u32();
  b.txs.reserve(n);
  for (uint32_t i = 0; i < n; i++) {
    Tx tx;
    tx.id = r.u64();
    tx.created_at = r.i64();
    b.txs.push_back(tx);
  }
  return b;
}

VoteRole role_of_kind(WireKind k) {
  switch (k) {
    case WireKind::pvc: return VoteRole::propose;
    case WireKind::npvc: return VoteRole::no_propose;
    case WireKind::cvc: return VoteRole::commit;
    default: throw CodecError("not a vote certificate kind");
  }
}

WireKind kind_of_role(VoteRole r) {
  switch (r) {
    case VoteRole::propose: return WireKind::pvc;
    case VoteRole::no_propose: return WireKind::npvc;
    case VoteRole::commit: return WireKind::cvc;
  }
  throw CodecError("bad vote role");
}

}  // namespace

const char* wire_kind_name(WireKind k) {
  switch (k) {
    case WireKind::vertex: return "vertex";
    case WireKind::rbc_send: return "send";
    case WireKind::rbc_echo: return "echo";
    case WireKind::rbc_ready: return "ready";
    case WireKind::rbc_ack: return "ack";
    case WireKind::rbc_cert: return "cert";
    case WireKind::vote: return "vote";
    case WireKind::timeout: return "timeout";
    case WireKind::tc: return "tc";
    case WireKind::pvc: return "pvc";
    case WireKind::npvc: return "npvc";
    case WireKind::cvc: return "cvc";
    case WireKind::no_vote: return "no_vote";
    case WireKind::nvc: return "nvc";
  }
  return "unknown";
}

Bytes encode_vertex(const Vertex& v) {
  ByteWriter w;
  w.u8(uint8_t(WireKind::vertex));
  w.u64(v.round);
  w.u32(v.source);
  w.u8(v.propose ? 1 : 0);
  put_block(w, v.block);
  put_digests(w, v.strong_edges);
  put_digests(w, v.weak_edges);
  put_digests(w, v.leader_edges);
  w.u32(uint32_t(v.tcs.size()));
  for (const auto& tc : v.tcs) put_tc(w, tc);
  w.u8(v.nvc.has_value() ? 1 : 0);
  if (v.nvc) put_nvc(w, *v.nvc);
  return w.take();
}

Vertex decode_vertex(std::span<const uint8_t> data) {
  ByteReader r(data);
  if (r.u8() != uint8_t(WireKind::vertex))
    throw CodecError("payload is not a vertex");
  Vertex v;
  v.round = r.u64();
  v.source = r.u32();
  v.propose = r.u8() != 0;
  v.block = get_block(r);
  v.strong_edges = get_digests(r);
  v.weak_edges = get_digests(r);
  v.leader_edges = get_digests(r);
  uint32_t ntc = r.u32();
  v.tcs.reserve(ntc);
  for (uint32_t i = 0; i < ntc; i++) v.tcs.push_back(get_tc(r));
  if (r.u8() != 0) v.nvc = get_nvc(r);
  r.expect_end();
  return v;
}

Digest vertex_id(const Vertex& v) { return sha256(encode_vertex(v)); }

Bytes encode_message(const Message& msg) {
  ByteWriter w;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RbcMsg>) {
          w.u8(uint8_t(m.kind));
          w.u64(m.round);
          w.u32(m.origin);
          switch (m.kind) {
            case WireKind::rbc_send:
            case WireKind::rbc_echo:
            case WireKind::rbc_ready:
              w.blob(m.payload);
              break;
            case WireKind::rbc_ack:
              put_digest(w, m.digest);
              w.u8(m.ack_sig.has_value() ? 1 : 0);
              if (m.ack_sig) put_sig(w, *m.ack_sig);
              break;
            case WireKind::rbc_cert:
              w.blob(m.payload);
              put_agg(w, m.cert ? *m.cert : AggregateSignature{});
              break;
            default:
              throw CodecError("bad rbc kind");
          }
        } else if constexpr (std::is_same_v<T, Vote>) {
          w.u8(uint8_t(WireKind::vote));
          w.u64(m.round);
          w.u32(m.source);
          w.u8(m.propose ? 1 : 0);
          put_digests(w, m.strong_edges);
          put_sig(w, m.sig);
        } else if constexpr (std::is_same_v<T, TimeoutMessage>) {
          w.u8(uint8_t(WireKind::timeout));
          w.u64(m.round);
          w.u32(m.source);
          put_sig(w, m.sig);
        } else if constexpr (std::is_same_v<T, TimeoutCertificate>) {
          w.u8(uint8_t(WireKind::tc));
          put_tc(w, m);
        } else if constexpr (std::is_same_v<T, VoteCertificate>) {
          w.u8(uint8_t(kind_of_role(m.role)));
          w.u64(m.round);
          w.u32(m.issuer);
          w.u32(uint32_t(m.variants.size()));
          for (const auto& a : m.variants) put_agg(w, a);
        } else if constexpr (std::is_same_v<T, NoVoteMessage>) {
          w.u8(uint8_t(WireKind::no_vote));
          w.u64(m.round);
          w.u32(m.leader);
          w.u32(m.source);
          put_sig(w, m.sig);
        } else if constexpr (std::is_same_v<T, NoVoteCertificate>) {
          w.u8(uint8_t(WireKind::nvc));
          put_nvc(w, m);
        }
      },
      msg);
  return w.take();
}

Message decode_message(std::span<const uint8_t> data) {
  ByteReader r(data);
  WireKind kind = WireKind(r.u8());
  switch (kind) {
    case WireKind::rbc_send:
    case WireKind::rbc_echo:
    case WireKind::rbc_ready:
    case WireKind::rbc_ack:
    case WireKind::rbc_cert: {
      RbcMsg m;
      m.kind = kind;
      m.round = r.u64();
      m.origin = r.u32();
      if (kind == WireKind::rbc_ack) {
        m.digest = get_digest(r);
        if (r.u8() != 0) m.ack_sig = get_sig(r);
      } else {
        m.payload = r.blob();
        if (kind == WireKind::rbc_cert) m.cert = get_agg(r);
      }
      r.expect_end();
      return m;
    }
    case WireKind::vote: {
      Vote v;
      v.round = r.u64();
      v.source = r.u32();
      v.propose = r.u8() != 0;
      v.strong_edges = get_digests(r);
      v.sig = get_sig(r);
      r.expect_end();
      return v;
    }
    case WireKind::timeout: {
      TimeoutMessage t;
      t.round = r.u64();
      t.source = r.u32();
      t.sig = get_sig(r);
      r.expect_end();
      return t;
    }
    case WireKind::tc: {
      TimeoutCertificate tc = get_tc(r);
      r.expect_end();
      return tc;
    }
    case WireKind::pvc:
    case WireKind::npvc:
    case WireKind::cvc: {
      VoteCertificate c;
      c.role = role_of_kind(kind);
      c.round = r.u64();
      c.issuer = r.u32();
      uint32_t nv = r.u32();
      c.variants.reserve(nv);
      for (uint32_t i = 0; i < nv; i++) c.variants.push_back(get_agg(r));
      r.expect_end();
      return c;
    }
    case WireKind::no_vote: {
      NoVoteMessage m;
      m.round = r.u64();
      m.leader = r.u32();
      m.source = r.u32();
      m.sig = get_sig(r);
      r.expect_end();
      return m;
    }
    case WireKind::nvc: {
      NoVoteCertificate c = get_nvc(r);
      r.expect_end();
      return c;
    }
    default:
      throw CodecError("unknown wire kind");
  }
}

WireKind message_kind(const Message& msg) {
  return std::visit(
      [](const auto& m) -> WireKind {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RbcMsg>) return m.kind;
        else if constexpr (std::is_same_v<T, Vote>) return WireKind::vote;
        else if constexpr (std::is_same_v<T, TimeoutMessage>) return WireKind::timeout;
        else if constexpr (std::is_same_v<T, TimeoutCertificate>) return WireKind::tc;
        else if constexpr (std::is_same_v<T, VoteCertificate>) return kind_of_role(m.role);
        else if constexpr (std::is_same_v<T, NoVoteMessage>) return WireKind::no_vote;
        else return WireKind::nvc;
      },
      msg);
}

}  // namespace angelfish
