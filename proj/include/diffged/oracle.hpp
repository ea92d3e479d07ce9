#pragma once

#include <cstddef>
#include <vector>

#include "diffged/graph.hpp"
#include "diffged/types.hpp"

namespace diffged {

struct OracleResult {
  /// Exact GED when `optimal`; otherwise the best known upper bound.
  int ged = 0;
  /// Proven lower bound; equals ged when optimal.
  int lower_bound = 0;
  bool optimal = true;
  /// Mappings achieving ged, lexicographically sorted, at most the cap.
  std::vector<NodeMapping> optimal_mappings;
  std::size_t expanded = 0;
};

struct OracleOptions {
  /// Largest g.node_count() the brute-force search accepts.
  int max_nodes = 8;
  /// Number of optimal mappings to keep; 0 keeps none.
  std::size_t mapping_cap = 16;
};

/// Exhaustive search over all injective mappings. Throws Error when g has
/// more than options.max_nodes nodes.
OracleResult exact_ged_bruteforce(const GraphPair& pair, const OracleOptions& options = {});

/// Best-first search over partial mappings with an admissible bound
/// (label-multiset mismatch plus edge-count difference of the undecided
/// parts). When more than node_budget states are expanded before the optimum
/// is proven, returns a non-optimal result with an upper and lower bound.
OracleResult exact_ged_astar(const GraphPair& pair, std::size_t node_budget = 5'000'000,
                             std::size_t mapping_cap = 16);

/// Binary |V| x |V'| matrix with a one at (v, f(v)) for the ground-truth
/// mapping. Throws ValidationError if the pair has none.
BinaryMatrix ground_truth_matrix(const GraphPair& pair);

BinaryMatrix mapping_matrix(const NodeMapping& f, int rows, int cols);

}  // namespace diffged
