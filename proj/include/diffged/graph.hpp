#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "diffged/error.hpp"

namespace diffged {

/// Undirected edge, stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Undirected graph with one categorical label per node.
///
/// The edge list is normalized on construction (u < v, sorted, unique) and a
/// dense adjacency table is kept for O(1) edge queries. Instances are
/// immutable once built.
class LabeledGraph {
 public:
  LabeledGraph() = default;

  /// Throws ValidationError on self-loops, duplicate or dangling edges, or a
  /// label array whose length differs from node_count.
  LabeledGraph(int node_count, std::vector<Edge> edges, std::vector<int> labels);

  /// Unlabeled graph: every node carries label 0.
  static LabeledGraph unlabeled(int node_count, std::vector<Edge> edges);

  int node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(int v) const { return labels_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[static_cast<std::size_t>(v)]; }

  bool has_edge(int u, int v) const {
    return adjacency_[static_cast<std::size_t>(u) * static_cast<std::size_t>(node_count_) +
                      static_cast<std::size_t>(v)] != 0;
  }

  bool operator==(const LabeledGraph& other) const {
    return node_count_ == other.node_count_ && edges_ == other.edges_ && labels_ == other.labels_;
  }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> labels_;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<int>> neighbors_;
};

/// Injective map from the nodes of the smaller graph to the larger one:
/// entry v holds f(v).
using NodeMapping = std::vector<int>;

/// A pair of graphs oriented so that g.node_count() <= g_prime.node_count().
struct GraphPair {
  LabeledGraph g;
  LabeledGraph g_prime;
  std::optional<NodeMapping> ground_truth_mapping;
  std::optional<int> ground_truth_ged;
  /// True when the pair was stored in the opposite orientation on input.
  bool swapped = false;

  bool operator==(const GraphPair&) const = default;
};

/// Builds a pair, swapping the graphs if needed so that the first one is the
/// smaller. A ground-truth mapping is always expressed in the normalized
/// orientation. Throws ValidationError if the mapping is not injective or
/// the ground-truth GED is negative.
GraphPair make_graph_pair(LabeledGraph first, LabeledGraph second,
                          std::optional<NodeMapping> mapping = std::nullopt,
                          std::optional<int> ged = std::nullopt);

/// Throws ValidationError unless f is an injective map from g's nodes into
/// g_prime's nodes.
void validate_mapping(const GraphPair& pair, const NodeMapping& f);

/// Dense label id <-> label string table.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(std::vector<std::string> names);

  /// Id of name, appending it if unseen.
  int intern(const std::string& name);
  std::optional<int> find(const std::string& name) const;
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const LabelVocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

/// node_count x vocab.size() one-hot encoding of g's labels.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> one_hot_labels(const LabeledGraph& g,
                                                                     const LabelVocabulary& vocab) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(g.node_count(), vocab.size());
  for (int v = 0; v < g.node_count(); ++v) {
    const int id = g.label(v);
    if (id < 0 || id >= vocab.size()) {
      throw ValidationError("label id " + std::to_string(id) + " of node " + std::to_string(v) +
                            " is outside the vocabulary of size " + std::to_string(vocab.size()));
    }
    out(v, id) = Scalar(1);
  }
  return out;
}

/// Rewrites label ids from one vocabulary into another by label name.
/// Throws ValidationError if a name is missing from `to`.
LabeledGraph remap_labels(const LabeledGraph& g, const LabelVocabulary& from, const LabelVocabulary& to);
GraphPair remap_labels(const GraphPair& pair, const LabelVocabulary& from, const LabelVocabulary& to);

}  // namespace diffged
