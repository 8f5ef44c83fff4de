#include "angelfish/broadcast.hpp"

namespace angelfish {

namespace {

RbcMsg make(WireKind kind, Round round, PartyId origin) {
  RbcMsg m;
  m.kind = kind;
  m.round = round;
  m.origin = origin;
  return m;
}

}  // namespace

void RbcEngine::broadcast(Round round, Bytes payload, std::vector<RbcOut>& out) {
  RbcMsg send = make(WireKind::rbc_send, round, me_);
  send.payload = std::move(payload);
  out.push_back({std::nullopt, std::move(send)});
}

void RbcEngine::note_payload(Instance& inst, Round round, PartyId origin,
                             const Bytes& payload, const Digest& digest,
                             std::vector<RbcEvent>& events) {
  auto [it, fresh] = inst.payloads.emplace(digest, payload);
  (void)it;
  if (fresh && inst.payloads.size() > 1 && !inst.equivocation) {
    inst.equivocation = true;
    events.push_back({RbcEvent::Kind::equivocation, round, origin, {}});
  }
  if (!inst.first_emitted) {
    inst.first_emitted = true;
    events.push_back({RbcEvent::Kind::first_message, round, origin, payload});
  }
}

void RbcEngine::deliver(Instance& inst, Round round, PartyId origin,
                        const Digest& digest, std::vector<RbcEvent>& events) {
  if (inst.delivered) return;
  auto it = inst.payloads.find(digest);
  if (it == inst.payloads.end()) return;  // quorum before payload; wait
  inst.delivered = true;
  events.push_back({RbcEvent::Kind::delivered, round, origin, it->second});
}

void RbcEngine::check_fast_path(Instance& inst, Round round, PartyId origin,
                                std::vector<RbcEvent>& events) {
  if (inst.delivered) return;
  for (auto& [digest, signers] : inst.avail) {
    if (signers.size() >= n_ - f_ && inst.payloads.count(digest)) {
      deliver(inst, round, origin, digest, events);
      return;
    }
  }
}

void RbcEngine::on_message(PartyId src, const RbcMsg& m, std::vector<RbcOut>& out,
                           std::vector<RbcEvent>& events) {
  Instance& inst = instance(m.round, m.origin);

  switch (m.kind) {
    case WireKind::rbc_send: {
      // Channels are authenticated: a send must come from its origin.
      if (src != m.origin) return;
      Digest d = sha256(m.payload);
      note_payload(inst, m.round, m.origin, m.payload, d, events);

      if (mode_ == RbcKind::bracha) {
        if (!inst.echoed) {
          inst.echoed = d;
          RbcMsg echo = make(WireKind::rbc_echo, m.round, m.origin);
          echo.payload = m.payload;
          out.push_back({std::nullopt, std::move(echo)});
        }
      } else if (mode_ == RbcKind::two_step_certified) {
        if (!inst.echoed) {
          inst.echoed = d;
          RbcMsg ack = make(WireKind::rbc_ack, m.round, m.origin);
          ack.digest = d;
          ack.ack_sig = sign(me_, d);
          out.push_back({m.origin, std::move(ack)});
        }
      } else {  // fast_path
        inst.avail[d].insert(m.origin);  // the origin evidently holds it
        if (!inst.echoed) {
          inst.echoed = d;
          inst.avail[d].insert(me_);
          RbcMsg ack = make(WireKind::rbc_ack, m.round, m.origin);
          ack.digest = d;
          out.push_back({std::nullopt, std::move(ack)});
        }
        check_fast_path(inst, m.round, m.origin, events);
      }
      break;
    }

    case WireKind::rbc_echo: {
      if (mode_ != RbcKind::bracha) return;
      Digest d = sha256(m.payload);
      note_payload(inst, m.round, m.origin, m.payload, d, events);
      inst.echoes[d].insert(src);
      if (inst.echoes[d].size() >= n_ - f_ && !inst.ready_sent) {
        inst.ready_sent = d;
        RbcMsg ready = make(WireKind::rbc_ready, m.round, m.origin);
        ready.payload = m.payload;
        out.push_back({std::nullopt, std::move(ready)});
      }
      break;
    }

    case WireKind::rbc_ready: {
      if (mode_ != RbcKind::bracha) return;
      Digest d = sha256(m.payload);
      note_payload(inst, m.round, m.origin, m.payload, d, events);
      inst.readys[d].insert(src);
      if (inst.readys[d].size() >= f_ + 1 && !inst.ready_sent) {
        inst.ready_sent = d;
        RbcMsg ready = make(WireKind::rbc_ready, m.round, m.origin);
        ready.payload = m.payload;
        out.push_back({std::nullopt, std::move(ready)});
      }
      if (inst.readys[d].size() >= n_ - f_) deliver(inst, m.round, m.origin, d, events);
      break;
    }

    case WireKind::rbc_ack: {
      if (mode_ == RbcKind::two_step_certified) {
        // Only the origin assembles its own availability certificate.
        if (m.origin != me_ || inst.cert_formed) return;
        if (!m.ack_sig || m.ack_sig->signer != src ||
            !verify(*m.ack_sig, m.digest))
          return;
        auto& agg = inst.acks.try_emplace(m.digest, AggregateSignature{m.digest, {}})
                        .first->second;
        agg.signers.insert(src);
        auto payload_it = inst.payloads.find(m.digest);
        if (agg.signers.size() >= n_ - f_ && payload_it != inst.payloads.end()) {
          inst.cert_formed = true;
          RbcMsg cert = make(WireKind::rbc_cert, m.round, m.origin);
          cert.payload = payload_it->second;
          cert.cert = agg;
          out.push_back({std::nullopt, std::move(cert)});
        }
      } else if (mode_ == RbcKind::fast_path) {
        inst.avail[m.digest].insert(src);
        inst.avail[m.digest].insert(m.origin);
        check_fast_path(inst, m.round, m.origin, events);
      }
      break;
    }

    case WireKind::rbc_cert: {
      if (mode_ != RbcKind::two_step_certified) return;
      Digest d = sha256(m.payload);
      if (!m.cert || m.cert->signers.size() < n_ - f_ ||
          !verify_aggregate(*m.cert, d, n_))
        return;
      note_payload(inst, m.round, m.origin, m.payload, d, events);
      bool was_delivered = inst.delivered;
      deliver(inst, m.round, m.origin, d, events);
      if (!was_delivered && inst.delivered && !inst.cert_forwarded) {
        // Forward once so every honest party sees the certified payload
        // even when the origin hands it to a subset only.
        inst.cert_forwarded = true;
        out.push_back({std::nullopt, m});
      }
      break;
    }

    default:
      break;
  }
}

bool RbcEngine::delivered(Round round, PartyId origin) const {
  auto it = instances_.find({round, origin});
  return it != instances_.end() && it->second.delivered;
}

bool RbcEngine::equivocation_seen(Round round, PartyId origin) const {
  auto it = instances_.find({round, origin});
  return it != instances_.end() && it->second.equivocation;
}

uint64_t RbcEngine::state_fingerprint() const {
  Bytes buf;
  auto put64 = [&buf](uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(uint8_t(v >> (8 * i)));
  };
  auto put_digest = [&buf](const Digest& d) {
    buf.insert(buf.end(), d.bytes.begin(), d.bytes.end());
  };
  auto put_signers = [&](const SignerSet& s) {
    put64(s.size());
    for (PartyId p : s) put64(p);
  };
  put64(instances_.size());
  for (const auto& [key, inst] : instances_) {
    put64(key.first);
    put64(key.second);
    buf.push_back(uint8_t(inst.first_emitted) | uint8_t(inst.delivered) << 1 |
                  uint8_t(inst.equivocation) << 2 |
                  uint8_t(inst.cert_forwarded) << 3 |
                  uint8_t(inst.cert_formed) << 4 |
                  uint8_t(inst.echoed.has_value()) << 5 |
                  uint8_t(inst.ready_sent.has_value()) << 6);
    if (inst.echoed) put_digest(*inst.echoed);
    if (inst.ready_sent) put_digest(*inst.ready_sent);
    put64(inst.payloads.size());
    for (const auto& [d, payload] : inst.payloads) {
      put_digest(d);
      put64(payload.size());
    }
    put64(inst.echoes.size());
    for (const auto& [d, s] : inst.echoes) {
      put_digest(d);
      put_signers(s);
    }
    put64(inst.readys.size());
    for (const auto& [d, s] : inst.readys) {
      put_digest(d);
      put_signers(s);
    }
    put64(inst.acks.size());
    for (const auto& [d, agg] : inst.acks) {
      put_digest(d);
      put_signers(agg.signers);
    }
    put64(inst.avail.size());
    for (const auto& [d, s] : inst.avail) {
      put_digest(d);
      put_signers(s);
    }
  }
  const Digest h = sha256(buf);
  uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= uint64_t(h.bytes[i]) << (8 * i);
  return out;
}

}  // namespace angelfish
