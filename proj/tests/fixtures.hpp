#pragma once

#include <vector>

#include "diffged/denoiser.hpp"
#include "diffged/graph.hpp"
#include "diffged/rng.hpp"
#include "diffged/synthetic.hpp"

namespace diffged::fixture {

// Labels: C = 0, N = 1, O = 2.
inline LabelVocabulary chem_vocab() { return LabelVocabulary({"C", "N", "O"}); }

/// Small molecule-like pair with GED 4: a C-C-O triangle against a C-N-O
/// path with an extra C. The optimum needs a relabel, a node insertion and
/// two edge edits.
inline GraphPair ged4_pair() {
  LabeledGraph g(3, {{0, 1}, {1, 2}, {0, 2}}, {0, 0, 2});
  LabeledGraph h(4, {{0, 1}, {1, 2}, {0, 3}}, {0, 1, 2, 0});
  return make_graph_pair(g, h, NodeMapping{0, 1, 2}, 4);
}

/// Pair with GED 3 used with a sparse predicted matrix: a C-C-O path against
/// a C-N-O-C path.
inline GraphPair ged3_pair() {
  LabeledGraph g(3, {{0, 1}, {1, 2}}, {0, 0, 2});
  LabeledGraph h(4, {{0, 1}, {1, 2}, {2, 3}}, {0, 1, 2, 0});
  return make_graph_pair(g, h, NodeMapping{0, 1, 2}, 3);
}

/// High-quality sparse prediction for ged3_pair: one dominant entry per row.
inline MatchingMatrix<double> ged3_sparse_prediction() {
  MatchingMatrix<double> m(3, 4);
  m << 0.93, 0.04, 0.02, 0.06,  //
      0.05, 0.88, 0.03, 0.09,   //
      0.01, 0.07, 0.95, 0.02;
  return m;
}

inline GraphPair random_pair(Rng& rng, int min_nodes, int max_nodes, int label_count) {
  const int n = static_cast<int>(uniform_int(rng, min_nodes, max_nodes));
  const int m = static_cast<int>(uniform_int(rng, min_nodes, max_nodes));
  const double p1 = 0.2 + 0.4 * uniform01(rng);
  const double p2 = 0.2 + 0.4 * uniform01(rng);
  LabeledGraph a = random_graph(n, p1, label_count, rng);
  LabeledGraph b = random_graph(m, p2, label_count, rng);
  return make_graph_pair(std::move(a), std::move(b), std::nullopt, std::nullopt);
}

inline DenoiserConfig tiny_config(int vocab = 3) {
  DenoiserConfig c;
  c.layer_dims = {6, 4};
  c.vocab_size = vocab;
  return c;
}

}  // namespace diffged::fixture
