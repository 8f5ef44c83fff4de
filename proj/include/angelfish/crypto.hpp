#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <optional>

#include "angelfish/base.hpp"

namespace angelfish {

// 32-byte content digest. SHA-256 keeps ids stable across processes and
// makes accidental collisions a non-issue at simulation scale.
struct Digest {
  std::array<uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex(size_t prefix_bytes = 32) const;
};

Digest sha256(std::span<const uint8_t> data);
inline Digest sha256(const Bytes& data) {
  return sha256(std::span<const uint8_t>(data.data(), data.size()));
}

// Sorted, duplicate-free set of party indices. Small n, so a flat vector
// beats node-based sets and gives deterministic iteration for free.
class SignerSet {
 public:
  SignerSet() = default;
  SignerSet(std::initializer_list<PartyId> ids) {
    for (auto id : ids) insert(id);
  }

  bool insert(PartyId id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) return false;
    ids_.insert(it, id);
    return true;
  }

  bool contains(PartyId id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  void merge(const SignerSet& other) {
    std::vector<PartyId> out;
    out.reserve(ids_.size() + other.ids_.size());
    std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                   other.ids_.end(), std::back_inserter(out));
    ids_ = std::move(out);
  }

  bool intersects(const SignerSet& other) const {
    auto a = ids_.begin();
    auto b = other.ids_.begin();
    while (a != ids_.end() && b != other.ids_.end()) {
      if (*a == *b) return true;
      if (*a < *b) ++a; else ++b;
    }
    return false;
  }

  size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<PartyId>& ids() const { return ids_; }

  bool operator==(const SignerSet&) const = default;

 private:
  std::vector<PartyId> ids_;
};

// Simulated signature: binds a signer to a content digest. Stands in for a
// real scheme so the quorum logic stays exact while runs stay fast and
// deterministic; forgery is outside the simulated fault model.
struct Signature {
  PartyId signer = 0;
  Digest content;

  bool operator==(const Signature&) const = default;
};

inline Signature sign(PartyId signer, const Digest& content) {
  return Signature{signer, content};
}

inline bool verify(const Signature& sig, const Digest& content) {
  return sig.content == content;
}

// Multi-signature over one content digest. Merging is signer-set union,
// mirroring how BLS aggregates would be combined.
struct AggregateSignature {
  Digest content;
  SignerSet signers;

  bool operator==(const AggregateSignature&) const = default;
};

// All inputs must cover the same content digest; mixing is a caller bug.
AggregateSignature aggregate(const std::vector<Signature>& sigs);

// Extends an aggregate with one more signature over the same content.
void aggregate_insert(AggregateSignature& agg, const Signature& sig);

// Union of two aggregates over the same content digest.
AggregateSignature merge_aggregates(const AggregateSignature& a,
                                    const AggregateSignature& b);

// Structural verification: right content and every signer a real party.
bool verify_aggregate(const AggregateSignature& agg, const Digest& content,
                      uint32_t n);

}  // namespace angelfish
