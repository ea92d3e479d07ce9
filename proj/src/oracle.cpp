#include "diffged/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <queue>

#include "diffged/edit_path.hpp"

namespace diffged {

namespace {

/// Cost contributed by assigning `v` to `target`, given the targets of the
/// nodes assigned before it (entries of `assigned` equal to -1 are unset).
int incremental_cost(const LabeledGraph& g, const LabeledGraph& h, const std::vector<int>& assigned,
                     int v, int target) {
  int cost = g.label(v) != h.label(target);
  for (int u = 0; u < g.node_count(); ++u) {
    const int tu = assigned[static_cast<std::size_t>(u)];
    if (tu < 0 || u == v) continue;
    const bool in_g = g.has_edge(u, v);
    const bool in_h = h.has_edge(tu, target);
    cost += in_g != in_h;
  }
  return cost;
}

struct BruteForce {
  const LabeledGraph& g;
  const LabeledGraph& h;
  std::size_t cap;
  std::vector<int> assigned;
  std::vector<char> used;
  int best = std::numeric_limits<int>::max();
  std::vector<NodeMapping> best_mappings;
  std::size_t leaves = 0;

  void search(int v, int partial) {
    const int n = g.node_count();
    if (v == n) {
      ++leaves;
      // Target edges touching unmatched nodes are all insertions.
      int cost = partial + h.node_count() - n;
      for (const auto& e : h.edges()) {
        cost += !used[static_cast<std::size_t>(e.u)] || !used[static_cast<std::size_t>(e.v)];
      }
      if (cost < best) {
        best = cost;
        best_mappings.clear();
      }
      if (cost == best && best_mappings.size() < cap) best_mappings.push_back(assigned);
      return;
    }
    for (int t = 0; t < h.node_count(); ++t) {
      if (used[static_cast<std::size_t>(t)]) continue;
      const int next = partial + incremental_cost(g, h, assigned, v, t);
      if (next > best) continue;
      assigned[static_cast<std::size_t>(v)] = t;
      used[static_cast<std::size_t>(t)] = 1;
      search(v + 1, next);
      used[static_cast<std::size_t>(t)] = 0;
      assigned[static_cast<std::size_t>(v)] = -1;
    }
  }
};

}  // namespace

OracleResult exact_ged_bruteforce(const GraphPair& pair, const OracleOptions& options) {
  if (pair.g.node_count() > options.max_nodes) {
    throw Error("brute-force oracle refuses graphs with " + std::to_string(pair.g.node_count()) +
                " nodes (limit " + std::to_string(options.max_nodes) + "); use exact_ged_astar instead");
  }
  BruteForce search{pair.g, pair.g_prime, options.mapping_cap,
                    std::vector<int>(static_cast<std::size_t>(pair.g.node_count()), -1),
                    std::vector<char>(static_cast<std::size_t>(pair.g_prime.node_count()), 0),
                    std::numeric_limits<int>::max(), {}, 0};
  search.search(0, 0);
  OracleResult result;
  result.ged = search.best;
  result.lower_bound = search.best;
  result.optimal_mappings = std::move(search.best_mappings);
  result.expanded = search.leaves;
  return result;
}

namespace {

struct SearchNode {
  int parent;
  int target;
  int depth;
  int cost;
  int bound;
};

}  // namespace

OracleResult exact_ged_astar(const GraphPair& pair, std::size_t node_budget, std::size_t mapping_cap) {
  const LabeledGraph& g = pair.g;
  const LabeledGraph& h = pair.g_prime;
  const int n = g.node_count();
  const int m = h.node_count();
  int label_count = 1;
  for (int l : g.labels()) label_count = std::max(label_count, l + 1);
  for (int l : h.labels()) label_count = std::max(label_count, l + 1);

  // High-degree nodes first: their edges are decided early.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.neighbors(a).size() > g.neighbors(b).size();
  });

  std::vector<SearchNode> arena;
  std::vector<int> assigned(static_cast<std::size_t>(n));
  std::vector<char> used(static_cast<std::size_t>(m));
  std::vector<int> label_left(static_cast<std::size_t>(label_count));
  std::vector<int> label_right(static_cast<std::size_t>(label_count));

  // Restores assigned/used for the partial mapping ending at `index`.
  auto load = [&](int index) {
    std::fill(assigned.begin(), assigned.end(), -1);
    std::fill(used.begin(), used.end(), 0);
    for (int i = index; i > 0; i = arena[static_cast<std::size_t>(i)].parent) {
      const auto& node = arena[static_cast<std::size_t>(i)];
      assigned[static_cast<std::size_t>(order[static_cast<std::size_t>(node.depth - 1)])] = node.target;
      used[static_cast<std::size_t>(node.target)] = 1;
    }
  };

  auto heuristic = [&](int depth) {
    std::fill(label_left.begin(), label_left.end(), 0);
    std::fill(label_right.begin(), label_right.end(), 0);
    for (int i = depth; i < n; ++i) ++label_left[static_cast<std::size_t>(g.label(order[static_cast<std::size_t>(i)]))];
    for (int t = 0; t < m; ++t) {
      if (!used[static_cast<std::size_t>(t)]) ++label_right[static_cast<std::size_t>(h.label(t))];
    }
    int common = 0;
    for (int l = 0; l < label_count; ++l) {
      common += std::min(label_left[static_cast<std::size_t>(l)], label_right[static_cast<std::size_t>(l)]);
    }
    const int label_bound = (n - depth) - common;
    int open_left = 0;
    for (const auto& e : g.edges()) {
      open_left += assigned[static_cast<std::size_t>(e.u)] < 0 || assigned[static_cast<std::size_t>(e.v)] < 0;
    }
    int open_right = 0;
    for (const auto& e : h.edges()) {
      open_right += !used[static_cast<std::size_t>(e.u)] || !used[static_cast<std::size_t>(e.v)];
    }
    return label_bound + std::abs(open_left - open_right);
  };

  auto worse = [&](int a, int b) {
    const auto& x = arena[static_cast<std::size_t>(a)];
    const auto& y = arena[static_cast<std::size_t>(b)];
    if (x.bound != y.bound) return x.bound > y.bound;
    if (x.depth != y.depth) return x.depth < y.depth;
    return a > b;
  };
  std::priority_queue<int, std::vector<int>, decltype(worse)> open(worse);

  arena.push_back({-1, -1, 0, m - n, 0});
  load(0);
  arena[0].bound = arena[0].cost + heuristic(0);
  open.push(0);

  OracleResult result;
  bool found = false;
  while (!open.empty()) {
    const int index = open.top();
    const SearchNode node = arena[static_cast<std::size_t>(index)];
    if (found && node.bound > result.ged) break;
    open.pop();
    if (node.depth == n) {
      // At a leaf the bound is exact: the only undecided edges are target
      // edges at unmatched nodes, which must be inserted.
      if (!found) {
        found = true;
        result.ged = node.bound;
        result.lower_bound = node.bound;
      }
      if (result.optimal_mappings.size() < mapping_cap) {
        load(index);
        result.optimal_mappings.push_back(assigned);
      }
      if (result.optimal_mappings.size() >= mapping_cap) break;
      continue;
    }
    if (!found && result.expanded >= node_budget) {
      result.optimal = false;
      result.lower_bound = node.bound;
      NodeMapping identity(static_cast<std::size_t>(n));
      std::iota(identity.begin(), identity.end(), 0);
      result.ged = edit_cost(pair, identity);
      result.optimal_mappings.clear();
      return result;
    }
    ++result.expanded;
    load(index);
    const int v = order[static_cast<std::size_t>(node.depth)];
    for (int t = 0; t < m; ++t) {
      if (used[static_cast<std::size_t>(t)]) continue;
      const int cost = node.cost + incremental_cost(g, h, assigned, v, t);
      assigned[static_cast<std::size_t>(v)] = t;
      used[static_cast<std::size_t>(t)] = 1;
      const int bound = cost + heuristic(node.depth + 1);
      assigned[static_cast<std::size_t>(v)] = -1;
      used[static_cast<std::size_t>(t)] = 0;
      arena.push_back({index, t, node.depth + 1, cost, bound});
      open.push(static_cast<int>(arena.size() - 1));
    }
  }
  std::sort(result.optimal_mappings.begin(), result.optimal_mappings.end());
  return result;
}

BinaryMatrix mapping_matrix(const NodeMapping& f, int rows, int cols) {
  BinaryMatrix out = BinaryMatrix::Zero(rows, cols);
  for (int v = 0; v < rows; ++v) out(v, f[static_cast<std::size_t>(v)]) = 1;
  return out;
}

BinaryMatrix ground_truth_matrix(const GraphPair& pair) {
  if (!pair.ground_truth_mapping) throw ValidationError("pair has no ground-truth mapping");
  validate_mapping(pair, *pair.ground_truth_mapping);
  return mapping_matrix(*pair.ground_truth_mapping, pair.g.node_count(), pair.g_prime.node_count());
}

}  // namespace diffged
