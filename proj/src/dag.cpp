#include "angelfish/dag.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace angelfish {

std::vector<Digest> DagStore::all_targets(const Vertex& v) const {
  std::vector<Digest> out;
  out.reserve(v.strong_edges.size() + v.weak_edges.size() +
              v.leader_edges.size());
  out.insert(out.end(), v.strong_edges.begin(), v.strong_edges.end());
  out.insert(out.end(), v.weak_edges.begin(), v.weak_edges.end());
  out.insert(out.end(), v.leader_edges.begin(), v.leader_edges.end());
  return out;
}

bool DagStore::targets_present(const Vertex& v, const Digest*) const {
  for (const auto& t : all_targets(v))
    if (!index_.count(t)) return false;
  return true;
}

bool DagStore::structurally_sound(const Vertex& v) const {
  if (v.round < 1) return false;
  for (const auto& t : v.strong_edges) {
    const Vertex* u = get_by_id(t);
    if (!u || u->round + 1 != v.round) return false;
  }
  for (const auto& t : v.weak_edges) {
    const Vertex* u = get_by_id(t);
    if (!u || u->round + 2 > v.round) return false;
  }
  std::optional<Round> leader_round;
  for (const auto& t : v.leader_edges) {
    const Vertex* u = get_by_id(t);
    if (!u || u->round + 2 > v.round) return false;
    if (leader_round && *leader_round != u->round) return false;
    leader_round = u->round;
  }
  return true;
}

DagStore::AddOutcome DagStore::try_add(const Vertex& v) {
  AddOutcome outcome;
  Digest id = vertex_id(v);
  if (index_.count(id) || buffer_.count(id)) return outcome;  // duplicate

  // Round-1 vertices cannot have edges: their targets would sit in a round
  // that does not exist, so they could never leave the buffer.
  if (v.round == 1 && (!v.strong_edges.empty() || !v.weak_edges.empty() ||
                       !v.leader_edges.empty())) {
    outcome.rejected = true;
    return outcome;
  }

  if (!targets_present(v)) {
    for (const auto& t : all_targets(v))
      if (!index_.count(t)) waiting_on_.emplace(t, id);
    buffer_.emplace(id, v);
    outcome.buffered = true;
    return outcome;
  }

  const Vertex* inserted = insert_resolved(v, id, outcome);
  outcome.rejected = (inserted == nullptr);
  if (inserted) cascade(id, outcome);
  return outcome;
}

const Vertex* DagStore::insert_resolved(const Vertex& v, const Digest& id,
                                        AddOutcome& outcome) {
  if (!structurally_sound(v)) return nullptr;
  if (validator_ && !validator_(v, *this)) return nullptr;

  auto& round_map = rounds_[v.round];
  auto existing = round_map.find(v.source);
  if (existing != round_map.end()) {
    // A second, different vertex for one (round, source). Reliable
    // broadcast delivery rules out reaching this through honest message
    // flow; keep the first and flag the store.
    equivocation_ = true;
    return nullptr;
  }

  auto node = std::make_unique<Node>();
  node->v = v;
  node->id = id;
  node->idx = nodes_.size();
  node->closure.assign(node->idx / 64 + 1, 0);
  node->closure[node->idx / 64] |= uint64_t(1) << (node->idx % 64);
  for (const auto& t : all_targets(v)) {
    const Node& target = *nodes_[index_.at(t)];
    for (size_t w = 0; w < target.closure.size(); w++)
      node->closure[w] |= target.closure[w];
  }

  index_.emplace(id, node->idx);
  round_map.emplace(v.source, node->idx);
  nodes_.push_back(std::move(node));
  const Vertex* out = &nodes_.back()->v;
  outcome.inserted.push_back(out);
  return out;
}

void DagStore::cascade(const Digest& newly_inserted, AddOutcome& outcome) {
  // Promote buffered vertices whose histories just became complete, lowest
  // (round, source) first so insertion order is deterministic and
  // ancestors always precede dependents.
  std::set<Digest> wake;
  auto collect = [&](const Digest& target) {
    auto [lo, hi] = waiting_on_.equal_range(target);
    for (auto it = lo; it != hi; ++it) wake.insert(it->second);
    waiting_on_.erase(lo, hi);
  };
  collect(newly_inserted);

  while (true) {
    const Digest* best = nullptr;
    const Vertex* best_v = nullptr;
    for (const auto& id : wake) {
      auto it = buffer_.find(id);
      if (it == buffer_.end() || !targets_present(it->second)) continue;
      const Vertex& cand = it->second;
      if (!best || cand.round < best_v->round ||
          (cand.round == best_v->round && cand.source < best_v->source) ||
          (cand.round == best_v->round && cand.source == best_v->source &&
           id < *best)) {
        best = &id;
        best_v = &cand;
      }
    }
    if (!best) break;
    Digest id = *best;
    Vertex v = buffer_.at(id);
    buffer_.erase(id);
    wake.erase(id);
    if (insert_resolved(v, id, outcome)) collect(id);
  }
}

const Vertex* DagStore::get(Round r, PartyId source) const {
  auto rit = rounds_.find(r);
  if (rit == rounds_.end()) return nullptr;
  auto it = rit->second.find(source);
  if (it == rit->second.end()) return nullptr;
  return &nodes_[it->second]->v;
}

const Vertex* DagStore::get_by_id(const Digest& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return nullptr;
  return &nodes_[it->second]->v;
}

std::vector<const Vertex*> DagStore::round_vertices(Round r) const {
  std::vector<const Vertex*> out;
  auto rit = rounds_.find(r);
  if (rit == rounds_.end()) return out;
  out.reserve(rit->second.size());
  for (const auto& [party, idx] : rit->second) out.push_back(&nodes_[idx]->v);
  return out;
}

size_t DagStore::round_size(Round r) const {
  auto rit = rounds_.find(r);
  return rit == rounds_.end() ? 0 : rit->second.size();
}

SignerSet DagStore::round_sources(Round r) const {
  SignerSet out;
  auto rit = rounds_.find(r);
  if (rit == rounds_.end()) return out;
  for (const auto& [party, idx] : rit->second) out.insert(party);
  return out;
}

bool DagStore::path(const Digest& from, const Digest& to) const {
  auto fit = index_.find(from);
  auto tit = index_.find(to);
  if (fit == index_.end() || tit == index_.end()) return false;
  return test_bit(nodes_[fit->second]->closure, tit->second);
}

bool DagStore::leader_path(
    const Digest& from, const Digest& to,
    const std::function<bool(const Vertex&)>& is_leader) const {
  auto fit = index_.find(from);
  auto tit = index_.find(to);
  if (fit == index_.end() || tit == index_.end()) return false;
  // Cheap prune: a leader path is in particular a path.
  if (!test_bit(nodes_[fit->second]->closure, tit->second)) return false;

  const Node& target = *nodes_[tit->second];
  std::vector<size_t> stack{fit->second};
  std::set<size_t> seen{fit->second};
  while (!stack.empty()) {
    const Node& cur = *nodes_[stack.back()];
    stack.pop_back();
    if (!is_leader(cur.v)) continue;
    if (cur.idx == target.idx) return true;
    auto expand = [&](const std::vector<Digest>& edges) {
      for (const auto& e : edges) {
        size_t idx = index_.at(e);
        // Only descend where the target is still reachable.
        if (!seen.count(idx) && test_bit(nodes_[idx]->closure, target.idx)) {
          seen.insert(idx);
          stack.push_back(idx);
        }
      }
    };
    expand(cur.v.strong_edges);
    expand(cur.v.leader_edges);
  }
  return false;
}

std::vector<Digest> DagStore::compute_weak_edges(
    Round r, const std::vector<Digest>& targets) const {
  std::vector<Digest> out;
  if (r < 3) return out;
  std::vector<uint64_t> covered(nodes_.empty() ? 1 : (nodes_.size() - 1) / 64 + 1,
                                0);
  for (const auto& t : targets) {
    auto it = index_.find(t);
    if (it == index_.end()) continue;
    const auto& closure = nodes_[it->second]->closure;
    for (size_t w = 0; w < closure.size(); w++) covered[w] |= closure[w];
  }
  for (Round rr = r - 2; rr >= 1; rr--) {
    auto rit = rounds_.find(rr);
    if (rit != rounds_.end()) {
      for (const auto& [party, idx] : rit->second) {
        if (!test_bit(covered, idx)) {
          out.push_back(nodes_[idx]->id);
          const auto& closure = nodes_[idx]->closure;
          for (size_t w = 0; w < closure.size(); w++) covered[w] |= closure[w];
        }
      }
    }
    if (rr == 1) break;
  }
  return out;
}

std::vector<const Vertex*> DagStore::causal_history(const Digest& v) const {
  std::vector<const Vertex*> out;
  auto it = index_.find(v);
  if (it == index_.end()) return out;
  const auto& closure = nodes_[it->second]->closure;
  for (size_t w = 0; w < closure.size(); w++) {
    uint64_t bits = closure[w];
    while (bits) {
      int b = std::countr_zero(bits);
      bits &= bits - 1;
      out.push_back(&nodes_[64 * w + b]->v);
    }
  }
  return out;
}

Digest DagStore::id_of(const Vertex& v) const {
  auto rit = rounds_.find(v.round);
  if (rit != rounds_.end()) {
    auto it = rit->second.find(v.source);
    if (it != rit->second.end() && nodes_[it->second]->v == v)
      return nodes_[it->second]->id;
  }
  return vertex_id(v);
}

std::string DagStore::export_dot(
    Round lo, Round hi,
    const std::function<bool(const Vertex&)>& is_leader) const {
  std::ostringstream os;
  os << "digraph dag {\n  rankdir=RL;\n  node [shape=box];\n";
  auto name = [&](const Node& n) {
    return "\"r" + std::to_string(n.v.round) + "_p" +
           std::to_string(n.v.source) + "\"";
  };
  for (Round r = lo; r <= hi; r++) {
    auto rit = rounds_.find(r);
    if (rit == rounds_.end()) continue;
    os << "  subgraph cluster_r" << r << " {\n    label=\"round " << r
       << "\";\n";
    for (const auto& [party, idx] : rit->second) {
      const Node& n = *nodes_[idx];
      os << "    " << name(n) << " [label=\"p" << party << "\\n"
         << n.id.hex(4) << "\"";
      if (is_leader && is_leader(n.v)) os << " style=bold";
      os << "];\n";
    }
    os << "  }\n";
  }
  for (Round r = lo; r <= hi; r++) {
    auto rit = rounds_.find(r);
    if (rit == rounds_.end()) continue;
    for (const auto& [party, idx] : rit->second) {
      const Node& n = *nodes_[idx];
      auto emit = [&](const std::vector<Digest>& edges, const char* style) {
        for (const auto& e : edges) {
          auto eit = index_.find(e);
          if (eit == index_.end()) continue;
          const Node& t = *nodes_[eit->second];
          if (t.v.round < lo) continue;
          os << "  " << name(n) << " -> " << name(t) << " [style=" << style
             << "];\n";
        }
      };
      emit(n.v.strong_edges, "solid");
      emit(n.v.weak_edges, "dashed");
      emit(n.v.leader_edges, "bold");
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace angelfish
