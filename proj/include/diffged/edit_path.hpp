#pragma once

#include <compare>
#include <vector>

#include "diffged/graph.hpp"
#include "json.hpp"

namespace diffged {

enum class EditKind : int { relabel = 0, insert_node = 1, delete_edge = 2, insert_edge = 3 };

/// One unit-cost edit on the (growing) source graph.
///
/// relabel:     node `a` takes label `label`.
/// insert_node: a new node with index `a` and label `label`, matched to
///              target node `b`.
/// delete_edge / insert_edge: edge (a, b) with a < b, in source indices
///              (inserted nodes included).
struct EditOp {
  EditKind kind = EditKind::relabel;
  int a = 0;
  int b = 0;
  int label = 0;
  auto operator<=>(const EditOp&) const = default;
};

struct EditScript {
  std::vector<EditOp> operations;
  int cost() const { return static_cast<int>(operations.size()); }
  bool operator==(const EditScript&) const = default;
};

/// Edit script induced by an injective mapping. Operations come in four
/// phases: relabels, node insertions, edge deletions, edge insertions. An
/// edge (u, v) of g is deleted when (f(u), f(v)) is not an edge of g_prime;
/// an edge of g_prime whose preimage is not an edge of g is inserted.
/// Inserted nodes receive indices g.node_count(), g.node_count()+1, ... in
/// increasing order of the unmatched target node they stand for.
EditScript derive_edit_path(const GraphPair& pair, const NodeMapping& f);

/// Cost of derive_edit_path(pair, f) without building the script, in
/// O(|V'| + |E| + |E'|).
int edit_cost(const GraphPair& pair, const NodeMapping& f);

/// f extended to the inserted nodes, in the index convention of
/// derive_edit_path; a bijection onto g_prime's nodes.
NodeMapping extend_mapping(const GraphPair& pair, const NodeMapping& f);

/// Replays a script on g.
LabeledGraph apply_edit_script(const LabeledGraph& g, const EditScript& script);

/// True if replaying the script on g yields g_prime up to the extended
/// mapping: node i carries g_prime's label of f(i) and (i, j) is an edge iff
/// (f(i), f(j)) is.
bool script_reaches_target(const GraphPair& pair, const NodeMapping& f, const EditScript& script);

/// Script with operations sorted within each phase; used to compare paths
/// irrespective of operation order.
EditScript canonicalize(EditScript script);

nlohmann::json script_to_json(const EditScript& script, const LabelVocabulary& vocab);

}  // namespace diffged
