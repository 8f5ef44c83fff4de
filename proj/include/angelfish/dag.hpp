#pragma once

#include <functional>
#include <map>
#include <memory>

#include "angelfish/encoding.hpp"

namespace angelfish {

// Round-structured vertex store with causal-completeness gating: a vertex
// becomes part of the DAG only once every edge target is already present,
// so the causal history of anything in the store is always fully local.
// Arrivals with missing targets wait in a pending buffer and are promoted
// in cascade (lowest round first) as their targets land.
//
// Reachability is precomputed: because ancestors are always inserted
// before their descendants, each vertex carries a bitset of its causal
// closure over insertion indices, making path() a bit probe.
class DagStore {
 public:
  // Protocol-level acceptance check, invoked once all of a vertex's edge
  // targets are resolvable and before insertion. Returning false drops the
  // vertex. Structural round arithmetic is checked by the store itself.
  using Validator = std::function<bool(const Vertex& v, const DagStore& dag)>;

  struct AddOutcome {
    // Vertices inserted by this call (the offered one and any promoted
    // dependents), in insertion order.
    std::vector<const Vertex*> inserted;
    bool buffered = false;   // offered vertex waits on missing targets
    bool rejected = false;   // offered vertex failed validation
  };

  explicit DagStore(Validator validator = {})
      : validator_(std::move(validator)) {}

  AddOutcome try_add(const Vertex& v);

  const Vertex* get(Round r, PartyId source) const;
  const Vertex* get_by_id(const Digest& id) const;
  bool contains(const Digest& id) const { return index_.count(id) != 0; }

  // Parties with a vertex in round r, in index order.
  std::vector<const Vertex*> round_vertices(Round r) const;
  size_t round_size(Round r) const;
  SignerSet round_sources(Round r) const;

  // True when `to` lies in the causal history of `from` (any edge type).
  // Both vertices must be in the store.
  bool path(const Digest& from, const Digest& to) const;

  // Like path(), but restricted to strong and leader edges with every
  // vertex on the walk satisfying is_leader.
  bool leader_path(const Digest& from, const Digest& to,
                   const std::function<bool(const Vertex&)>& is_leader) const;

  // Weak edges for a vertex under construction at round r whose strong and
  // leader targets are `targets`: every stored vertex at rounds <= r-2 not
  // already covered, scanned from round r-2 downward.
  std::vector<Digest> compute_weak_edges(
      Round r, const std::vector<Digest>& targets) const;

  // Every stored vertex reachable from v (v included), unsorted.
  std::vector<const Vertex*> causal_history(const Digest& v) const;

  Digest id_of(const Vertex& v) const;

  bool equivocation_detected() const { return equivocation_; }
  size_t size() const { return nodes_.size(); }
  size_t buffered_count() const { return buffer_.size(); }

  // Graphviz rendering of rounds [lo, hi]: one cluster per round, strong
  // edges solid, weak edges dashed, leader edges bold.
  std::string export_dot(
      Round lo, Round hi,
      const std::function<bool(const Vertex&)>& is_leader) const;

 private:
  struct Node {
    Vertex v;
    Digest id;
    size_t idx = 0;
    std::vector<uint64_t> closure;  // bit i set: vertex with index i reachable
  };

  static bool test_bit(const std::vector<uint64_t>& bits, size_t i) {
    size_t w = i / 64;
    return w < bits.size() && (bits[w] >> (i % 64)) & 1;
  }

  bool targets_present(const Vertex& v, const Digest* missing = nullptr) const;
  std::vector<Digest> all_targets(const Vertex& v) const;
  bool structurally_sound(const Vertex& v) const;
  const Vertex* insert_resolved(const Vertex& v, const Digest& id,
                                AddOutcome& outcome);
  void cascade(const Digest& newly_inserted, AddOutcome& outcome);

  Validator validator_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<Digest, size_t> index_;
  std::map<Round, std::map<PartyId, size_t>> rounds_;
  std::map<Digest, Vertex> buffer_;
  std::multimap<Digest, Digest> waiting_on_;  // missing target -> buffered id
  bool equivocation_ = false;
};

}  // namespace angelfish
