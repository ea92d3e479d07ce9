#include "diffged/graph.hpp"

#include <algorithm>

namespace diffged {

LabeledGraph::LabeledGraph(int node_count, std::vector<Edge> edges, std::vector<int> labels)
    : node_count_(node_count), edges_(std::move(edges)), labels_(std::move(labels)) {
  if (node_count_ < 0) throw ValidationError("negative node count");
  if (labels_.size() != static_cast<std::size_t>(node_count_)) {
    throw ValidationError("label array has " + std::to_string(labels_.size()) +
                          " entries for " + std::to_string(node_count_) + " nodes");
  }
  const auto n = static_cast<std::size_t>(node_count_);
  adjacency_.assign(n * n, 0);
  neighbors_.assign(n, {});
  for (auto& e : edges_) {
    if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u));
    if (e.u < 0 || e.v < 0 || e.u >= node_count_ || e.v >= node_count_) {
      throw ValidationError("dangling edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") in graph with " + std::to_string(node_count_) + " nodes");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  for (const auto& e : edges_) {
    auto& cell = adjacency_[static_cast<std::size_t>(e.u) * n + static_cast<std::size_t>(e.v)];
    if (cell != 0) {
      throw ValidationError("duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    }
    cell = 1;
    adjacency_[static_cast<std::size_t>(e.v) * n + static_cast<std::size_t>(e.u)] = 1;
    neighbors_[static_cast<std::size_t>(e.u)].push_back(e.v);
    neighbors_[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());
}

LabeledGraph LabeledGraph::unlabeled(int node_count, std::vector<Edge> edges) {
  return LabeledGraph(node_count, std::move(edges),
                      std::vector<int>(static_cast<std::size_t>(std::max(node_count, 0)), 0));
}

void validate_mapping(const GraphPair& pair, const NodeMapping& f) {
  const int n = pair.g.node_count();
  const int m = pair.g_prime.node_count();
  if (f.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("node mapping has " + std::to_string(f.size()) + " entries, expected " +
                          std::to_string(n));
  }
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (int v = 0; v < n; ++v) {
    const int target = f[static_cast<std::size_t>(v)];
    if (target < 0 || target >= m) {
      throw ValidationError("node mapping sends " + std::to_string(v) + " to " +
                            std::to_string(target) + ", outside [0," + std::to_string(m) + ")");
    }
    if (used[static_cast<std::size_t>(target)]) {
      throw ValidationError("node mapping is not injective: target " + std::to_string(target) +
                            " used twice");
    }
    used[static_cast<std::size_t>(target)] = 1;
  }
}

GraphPair make_graph_pair(LabeledGraph first, LabeledGraph second, std::optional<NodeMapping> mapping,
                          std::optional<int> ged) {
  GraphPair pair;
  pair.swapped = first.node_count() > second.node_count();
  if (pair.swapped) std::swap(first, second);
  pair.g = std::move(first);
  pair.g_prime = std::move(second);
  if (ged && *ged < 0) throw ValidationError("negative ground-truth GED");
  pair.ground_truth_ged = ged;
  if (mapping) validate_mapping(pair, *mapping);
  pair.ground_truth_mapping = std::move(mapping);
  return pair;
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> names) {
  for (auto& name : names) {
    if (ids_.count(name)) throw ValidationError("duplicate label '" + name + "' in vocabulary");
    intern(name);
  }
}

int LabelVocabulary::intern(const std::string& name) {
  auto [it, inserted] = ids_.try_emplace(name, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<int> LabelVocabulary::find(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

LabeledGraph remap_labels(const LabeledGraph& g, const LabelVocabulary& from, const LabelVocabulary& to) {
  std::vector<int> labels(g.labels().size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const auto& name = from.name(g.labels()[v]);
    auto id = to.find(name);
    if (!id) throw ValidationError("label '" + name + "' is not in the target vocabulary");
    labels[v] = *id;
  }
  return LabeledGraph(g.node_count(), g.edges(), std::move(labels));
}

GraphPair remap_labels(const GraphPair& pair, const LabelVocabulary& from, const LabelVocabulary& to) {
  GraphPair out = pair;
  out.g = remap_labels(pair.g, from, to);
  out.g_prime = remap_labels(pair.g_prime, from, to);
  return out;
}

}  // namespace diffged
