#include "diffged/edit_path.hpp"

#include <algorithm>

namespace diffged {

namespace {

std::vector<int> inverse_of(const NodeMapping& extended, int target_count) {
  std::vector<int> inverse(static_cast<std::size_t>(target_count), -1);
  for (std::size_t v = 0; v < extended.size(); ++v) inverse[static_cast<std::size_t>(extended[v])] = static_cast<int>(v);
  return inverse;
}

Edge normalized(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

}  // namespace

NodeMapping extend_mapping(const GraphPair& pair, const NodeMapping& f) {
  validate_mapping(pair, f);
  const int m = pair.g_prime.node_count();
  NodeMapping extended = f;
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (int target : f) used[static_cast<std::size_t>(target)] = 1;
  for (int t = 0; t < m; ++t) {
    if (!used[static_cast<std::size_t>(t)]) extended.push_back(t);
  }
  return extended;
}

EditScript derive_edit_path(const GraphPair& pair, const NodeMapping& f) {
  const LabeledGraph& g = pair.g;
  const LabeledGraph& h = pair.g_prime;
  const NodeMapping extended = extend_mapping(pair, f);
  const std::vector<int> inverse = inverse_of(extended, h.node_count());
  const int n = g.node_count();

  EditScript script;
  for (int v = 0; v < n; ++v) {
    const int target_label = h.label(f[static_cast<std::size_t>(v)]);
    if (g.label(v) != target_label) script.operations.push_back({EditKind::relabel, v, 0, target_label});
  }
  for (std::size_t i = static_cast<std::size_t>(n); i < extended.size(); ++i) {
    script.operations.push_back({EditKind::insert_node, static_cast<int>(i), extended[i], h.label(extended[i])});
  }
  for (const auto& e : g.edges()) {
    if (!h.has_edge(f[static_cast<std::size_t>(e.u)], f[static_cast<std::size_t>(e.v)])) {
      script.operations.push_back({EditKind::delete_edge, e.u, e.v, 0});
    }
  }
  for (const auto& e : h.edges()) {
    const int a = inverse[static_cast<std::size_t>(e.u)];
    const int b = inverse[static_cast<std::size_t>(e.v)];
    if (a >= n || b >= n || !g.has_edge(a, b)) {
      const Edge s = normalized(a, b);
      script.operations.push_back({EditKind::insert_edge, s.u, s.v, 0});
    }
  }
  return script;
}

int edit_cost(const GraphPair& pair, const NodeMapping& f) {
  validate_mapping(pair, f);
  const LabeledGraph& g = pair.g;
  const LabeledGraph& h = pair.g_prime;
  int cost = h.node_count() - g.node_count();
  for (int v = 0; v < g.node_count(); ++v) cost += g.label(v) != h.label(f[static_cast<std::size_t>(v)]);
  int preserved = 0;
  for (const auto& e : g.edges()) {
    preserved += h.has_edge(f[static_cast<std::size_t>(e.u)], f[static_cast<std::size_t>(e.v)]);
  }
  return cost + static_cast<int>(g.edge_count() + h.edge_count()) - 2 * preserved;
}

LabeledGraph apply_edit_script(const LabeledGraph& g, const EditScript& script) {
  std::vector<int> labels = g.labels();
  std::vector<Edge> edges = g.edges();
  for (const auto& op : script.operations) {
    switch (op.kind) {
      case EditKind::relabel:
        labels.at(static_cast<std::size_t>(op.a)) = op.label;
        break;
      case EditKind::insert_node:
        if (op.a != static_cast<int>(labels.size())) throw ValidationError("node insertion out of order");
        labels.push_back(op.label);
        break;
      case EditKind::delete_edge: {
        auto it = std::find(edges.begin(), edges.end(), normalized(op.a, op.b));
        if (it == edges.end()) throw ValidationError("deleting an absent edge");
        edges.erase(it);
        break;
      }
      case EditKind::insert_edge:
        edges.push_back(normalized(op.a, op.b));
        break;
    }
  }
  const int n = static_cast<int>(labels.size());
  return LabeledGraph(n, std::move(edges), std::move(labels));
}

bool script_reaches_target(const GraphPair& pair, const NodeMapping& f, const EditScript& script) {
  LabeledGraph result;
  try {
    result = apply_edit_script(pair.g, script);
  } catch (const ValidationError&) {
    return false;
  }
  const LabeledGraph& h = pair.g_prime;
  if (result.node_count() != h.node_count() || result.edge_count() != h.edge_count()) return false;
  const NodeMapping extended = extend_mapping(pair, f);
  for (int i = 0; i < result.node_count(); ++i) {
    if (result.label(i) != h.label(extended[static_cast<std::size_t>(i)])) return false;
  }
  for (const auto& e : result.edges()) {
    if (!h.has_edge(extended[static_cast<std::size_t>(e.u)], extended[static_cast<std::size_t>(e.v)])) return false;
  }
  return true;
}

EditScript canonicalize(EditScript script) {
  std::stable_sort(script.operations.begin(), script.operations.end());
  return script;
}

nlohmann::json script_to_json(const EditScript& script, const LabelVocabulary& vocab) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& op : script.operations) {
    switch (op.kind) {
      case EditKind::relabel:
        ops.push_back({{"op", "relabel"}, {"node", op.a}, {"label", vocab.name(op.label)}});
        break;
      case EditKind::insert_node:
        ops.push_back({{"op", "insert_node"}, {"node", op.a}, {"label", vocab.name(op.label)}, {"matched_to", op.b}});
        break;
      case EditKind::delete_edge:
        ops.push_back({{"op", "delete_edge"}, {"u", op.a}, {"v", op.b}});
        break;
      case EditKind::insert_edge:
        ops.push_back({{"op", "insert_edge"}, {"u", op.a}, {"v", op.b}});
        break;
    }
  }
  return {{"cost", script.cost()}, {"operations", std::move(ops)}};
}

}  // namespace diffged
