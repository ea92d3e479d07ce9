#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "diffged/dataset.hpp"
#include "diffged/graph.hpp"
#include "diffged/rng.hpp"

namespace diffged {

struct SyntheticOptions {
  /// Labels available to relabel and node-insert edits; 1 means unlabeled.
  int label_count = 1;
  bool allow_node_insertion = true;
  /// Pairs whose smaller graph has at most this many nodes are checked with
  /// the exact oracle and regenerated until the GED equals delta.
  int verify_max_nodes = 8;
  int max_attempts = 200;
};

/// Applies `delta` random unit edits to g (relabel a node, delete an edge,
/// insert an edge, insert a labeled node) without touching any node or edge
/// twice, so that no edit cancels another. The result pairs g with the
/// edited graph, ground-truth GED delta and the identity mapping.
///
/// Throws GenerationError if fewer than delta non-canceling edits exist or
/// no sampled sequence passes the exactness check.
GraphPair generate_synthetic_pair(const LabeledGraph& g, int delta, std::uint64_t rng_seed,
                                  const SyntheticOptions& options = {});

/// Inclusive delta range used for corpus generation from a base graph.
/// Graphs above 20 nodes draw from [1, 10]; smaller ones from
/// [1, small_graph_max_delta].
std::pair<int, int> corpus_delta_range(int node_count, int small_graph_max_delta = 5);

/// Connected random graph: a random spanning tree plus each remaining pair
/// with probability extra_edge_prob; labels uniform over label_count.
LabeledGraph random_graph(int node_count, double extra_edge_prob, int label_count, Rng& rng);

/// `count` random graphs with node counts uniform in [min_nodes, max_nodes];
/// graph i uses label_counts[i % label_counts.size()] labels.
std::vector<LabeledGraph> random_graphs(std::size_t count, int min_nodes, int max_nodes, double extra_edge_prob,
                                        const std::vector<int>& label_counts, std::uint64_t seed);

/// Renumbers g_prime's nodes: old node i becomes node perm[i]. The
/// ground-truth mapping follows the renumbering; the GED is unchanged.
GraphPair permute_target_nodes(const GraphPair& pair, const std::vector<int>& perm);

struct CorpusOptions {
  int per_graph = 10;
  int small_graph_max_delta = 5;
  /// Randomly renumber each partner's nodes so the ground-truth mapping is
  /// not the identity.
  bool shuffle_targets = true;
  SyntheticOptions synthetic;
};

/// `per_graph` synthetic partners for every base graph, with delta drawn
/// from corpus_delta_range. label_counts[i] overrides the label count for
/// base i when given; otherwise base i may use every label it carries.
std::vector<GraphPair> build_synthetic_corpus(const std::vector<LabeledGraph>& bases,
                                              std::uint64_t seed, const CorpusOptions& options,
                                              const std::vector<int>& label_counts = {});

/// Recipe for a corpus over random base graphs.
struct RandomCorpusSpec {
  std::size_t base_count = 0;
  int min_nodes = 5;
  int max_nodes = 8;
  double extra_edge_prob = 0.3;
  /// Cycled over the base graphs; 1 means unlabeled.
  std::vector<int> label_counts{1};
  CorpusOptions corpus;
  std::uint64_t seed = 0;
};

/// Random bases from derive_seed(seed, 0), partners from derive_seed(seed, 1).
/// The vocabulary holds the labels "0" .. "L-1" for the largest count L.
Dataset random_corpus(const RandomCorpusSpec& spec);

}  // namespace diffged
