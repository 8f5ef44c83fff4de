#include "angelfish/types.hpp"

namespace angelfish {

void ProtocolConfig::validate() const {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (n <= 3 * f) throw std::invalid_argument("requires n > 3f");
  if (timeout_tau <= 0) throw std::invalid_argument("timeout_tau must be positive");
  if (leaders_per_round == 0 || leaders_per_round > n)
    throw std::invalid_argument("leaders_per_round must be in [1, n]");
  if (propose_rate < 0.0 || propose_rate > 1.0)
    throw std::invalid_argument("propose_rate must be in [0, 1]");
}

std::vector<PartyId> multiple_leaders_of(Round r, const ProtocolConfig& cfg) {
  uint32_t k = cfg.leaders_per_round;
  std::vector<PartyId> out;
  out.reserve(k);
  if (cfg.leader_schedule_seed == 0) {
    // Round-robin: consecutive parties starting at r mod n.
    for (uint32_t i = 0; i < k; i++)
      out.push_back(PartyId((r + i) % cfg.n));
    return out;
  }
  // Seeded per-round permutation (Fisher-Yates over the party indices),
  // identical at every node for a given (seed, round).
  std::vector<PartyId> perm(cfg.n);
  for (uint32_t i = 0; i < cfg.n; i++) perm[i] = i;
  uint64_t state = mix_seeds(cfg.leader_schedule_seed, r);
  for (uint32_t i = cfg.n - 1; i > 0; i--) {
    state = splitmix64(state);
    uint32_t j = uint32_t(state % (uint64_t(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  out.assign(perm.begin(), perm.begin() + k);
  return out;
}

PartyId leader_of(Round r, const ProtocolConfig& cfg) {
  if (cfg.leader_schedule_seed == 0) return PartyId(r % cfg.n);
  ProtocolConfig one = cfg;
  one.leaders_per_round = 1;
  return multiple_leaders_of(r, one)[0];
}

namespace {

// Kind bytes for signed-content domains. Distinct from the wire message
// tags in encoding.hpp; these only feed digests.
constexpr uint8_t kVoteContentTag = 0xd1;
constexpr uint8_t kTimeoutContentTag = 0xd2;
constexpr uint8_t kNoVoteContentTag = 0xd3;

}  // namespace

Digest vote_content_digest(Round r, bool propose,
                           const std::vector<Digest>& strong_edges) {
  ByteWriter w;
  w.u8(kVoteContentTag);
  w.u64(r);
  w.u8(propose ? 1 : 0);
  w.u32(uint32_t(strong_edges.size()));
  for (const auto& d : strong_edges) w.raw(d.bytes.data(), d.bytes.size());
  return sha256(w.bytes());
}

Digest timeout_content_digest(Round r) {
  ByteWriter w;
  w.u8(kTimeoutContentTag);
  w.u64(r);
  return sha256(w.bytes());
}

Digest no_vote_content_digest(Round r, PartyId leader) {
  ByteWriter w;
  w.u8(kNoVoteContentTag);
  w.u64(r);
  w.u32(leader);
  return sha256(w.bytes());
}

}  // namespace angelfish
