#include "diffged/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "diffged/oracle.hpp"

namespace diffged {

namespace {

struct EditState {
  std::vector<int> labels;
  std::set<Edge> edges;
  std::set<Edge> touched_edges;
  std::vector<char> touched_nodes;
};

Edge normalized(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/// Returns false when no legal edit remains.
bool apply_random_edit(EditState& s, const SyntheticOptions& options, Rng& rng) {
  const int n = static_cast<int>(s.labels.size());
  std::vector<int> relabel;
  if (options.label_count > 1) {
    for (int v = 0; v < n; ++v) {
      if (!s.touched_nodes[static_cast<std::size_t>(v)]) relabel.push_back(v);
    }
  }
  std::vector<Edge> removable;
  for (const auto& e : s.edges) {
    if (!s.touched_edges.count(e)) removable.push_back(e);
  }
  std::vector<Edge> insertable;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const Edge e{u, v};
      if (!s.edges.count(e) && !s.touched_edges.count(e)) insertable.push_back(e);
    }
  }
  std::vector<int> kinds;
  if (!relabel.empty()) kinds.push_back(0);
  if (!removable.empty()) kinds.push_back(1);
  if (!insertable.empty()) kinds.push_back(2);
  if (options.allow_node_insertion) kinds.push_back(3);
  if (kinds.empty()) return false;

  const auto pick = [&rng](std::size_t size) {
    return static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(size) - 1));
  };
  switch (kinds[pick(kinds.size())]) {
    case 0: {
      const int v = relabel[pick(relabel.size())];
      const int old = s.labels[static_cast<std::size_t>(v)];
      int next = static_cast<int>(uniform_int(rng, 0, options.label_count - 2));
      if (next >= old) ++next;
      s.labels[static_cast<std::size_t>(v)] = next;
      s.touched_nodes[static_cast<std::size_t>(v)] = 1;
      break;
    }
    case 1: {
      const Edge e = removable[pick(removable.size())];
      s.edges.erase(e);
      s.touched_edges.insert(e);
      break;
    }
    case 2: {
      const Edge e = insertable[pick(insertable.size())];
      s.edges.insert(e);
      s.touched_edges.insert(e);
      break;
    }
    default: {
      s.labels.push_back(static_cast<int>(uniform_int(rng, 0, options.label_count - 1)));
      s.touched_nodes.push_back(1);
      break;
    }
  }
  return true;
}

}  // namespace

GraphPair generate_synthetic_pair(const LabeledGraph& g, int delta, std::uint64_t rng_seed,
                                  const SyntheticOptions& options) {
  if (delta < 1) throw GenerationError("delta must be at least 1");
  if (options.label_count < 1) throw GenerationError("label_count must be at least 1");
  for (int l : g.labels()) {
    if (l >= options.label_count) throw GenerationError("base graph uses a label outside label_count");
  }
  const bool verify = g.node_count() <= options.verify_max_nodes;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    Rng rng(derive_seed(rng_seed, static_cast<std::uint64_t>(attempt)));
    EditState s{g.labels(), std::set<Edge>(g.edges().begin(), g.edges().end()), {},
                std::vector<char>(static_cast<std::size_t>(g.node_count()), 0)};
    for (int step = 0; step < delta; ++step) {
      if (!apply_random_edit(s, options, rng)) {
        throw GenerationError("only " + std::to_string(step) + " non-canceling edits available, delta is " +
                              std::to_string(delta));
      }
    }
    const int n = static_cast<int>(s.labels.size());
    LabeledGraph edited(n, std::vector<Edge>(s.edges.begin(), s.edges.end()), std::move(s.labels));
    NodeMapping identity(static_cast<std::size_t>(g.node_count()));
    std::iota(identity.begin(), identity.end(), 0);
    GraphPair pair = make_graph_pair(g, std::move(edited), identity, delta);
    if (!verify) return pair;
    const OracleResult exact = exact_ged_astar(pair, 20'000'000, 0);
    if (exact.optimal && exact.ged == delta) return pair;
  }
  throw GenerationError("no edit sequence of length " + std::to_string(delta) +
                        " realised an exact GED after " + std::to_string(options.max_attempts) + " attempts");
}

std::pair<int, int> corpus_delta_range(int node_count, int small_graph_max_delta) {
  if (node_count > 20) return {1, 10};
  return {1, small_graph_max_delta};
}

LabeledGraph random_graph(int node_count, double extra_edge_prob, int label_count, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<int> order(static_cast<std::size_t>(node_count));
  std::iota(order.begin(), order.end(), 0);
  for (int i = node_count - 1; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(uniform_int(rng, 0, i))]);
  }
  std::set<Edge> present;
  for (int i = 1; i < node_count; ++i) {
    const int parent = order[static_cast<std::size_t>(uniform_int(rng, 0, i - 1))];
    present.insert(normalized(parent, order[static_cast<std::size_t>(i)]));
  }
  for (int u = 0; u < node_count; ++u) {
    for (int v = u + 1; v < node_count; ++v) {
      if (!present.count({u, v}) && bernoulli(rng, extra_edge_prob)) present.insert({u, v});
    }
  }
  edges.assign(present.begin(), present.end());
  std::vector<int> labels(static_cast<std::size_t>(node_count));
  for (auto& l : labels) l = static_cast<int>(uniform_int(rng, 0, label_count - 1));
  return LabeledGraph(node_count, std::move(edges), std::move(labels));
}

std::vector<LabeledGraph> random_graphs(std::size_t count, int min_nodes, int max_nodes, double extra_edge_prob,
                                        const std::vector<int>& label_counts, std::uint64_t seed) {
  if (min_nodes < 1 || max_nodes < min_nodes) throw GenerationError("need 1 <= min_nodes <= max_nodes");
  if (label_counts.empty()) throw GenerationError("label_counts must not be empty");
  std::vector<LabeledGraph> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    const int n = static_cast<int>(uniform_int(rng, min_nodes, max_nodes));
    out.push_back(random_graph(n, extra_edge_prob, label_counts[i % label_counts.size()], rng));
  }
  return out;
}

GraphPair permute_target_nodes(const GraphPair& pair, const std::vector<int>& perm) {
  const int m = pair.g_prime.node_count();
  if (static_cast<int>(perm.size()) != m) throw ValidationError("permutation size does not match g_prime");
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  for (int p : perm) {
    if (p < 0 || p >= m || seen[static_cast<std::size_t>(p)]) throw ValidationError("not a permutation");
    seen[static_cast<std::size_t>(p)] = 1;
  }
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = pair.g_prime.label(i);
  std::vector<Edge> edges;
  edges.reserve(pair.g_prime.edge_count());
  for (const auto& e : pair.g_prime.edges()) {
    edges.push_back({perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)]});
  }
  GraphPair out = pair;
  out.g_prime = LabeledGraph(m, std::move(edges), std::move(labels));
  if (out.ground_truth_mapping) {
    for (int& t : *out.ground_truth_mapping) t = perm[static_cast<std::size_t>(t)];
  }
  return out;
}

std::vector<GraphPair> build_synthetic_corpus(const std::vector<LabeledGraph>& bases, std::uint64_t seed,
                                              const CorpusOptions& options, const std::vector<int>& label_counts) {
  std::vector<GraphPair> out;
  out.reserve(bases.size() * static_cast<std::size_t>(options.per_graph));
  for (std::size_t i = 0; i < bases.size(); ++i) {
    SyntheticOptions synthetic = options.synthetic;
    if (i < label_counts.size()) {
      synthetic.label_count = label_counts[i];
    } else {
      for (int v = 0; v < bases[i].node_count(); ++v) {
        synthetic.label_count = std::max(synthetic.label_count, bases[i].label(v) + 1);
      }
    }
    const auto [lo, hi] = corpus_delta_range(bases[i].node_count(), options.small_graph_max_delta);
    for (int j = 0; j < options.per_graph; ++j) {
      const std::uint64_t pair_seed = derive_seed(seed, i, static_cast<std::uint64_t>(j));
      Rng rng(pair_seed);
      const int delta = static_cast<int>(uniform_int(rng, lo, hi));
      GraphPair pair = generate_synthetic_pair(bases[i], delta, derive_seed(pair_seed, 1), synthetic);
      if (options.shuffle_targets) {
        std::vector<int> perm(static_cast<std::size_t>(pair.g_prime.node_count()));
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = perm.size(); k > 1; --k) {
          std::swap(perm[k - 1], perm[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(k - 1)))]);
        }
        pair = permute_target_nodes(pair, perm);
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

Dataset random_corpus(const RandomCorpusSpec& spec) {
  if (spec.max_nodes < spec.min_nodes) throw ValidationError("max_nodes must be at least min_nodes");
  if (spec.label_counts.empty()) throw ValidationError("label_counts must not be empty");
  for (int l : spec.label_counts) {
    if (l < 1) throw ValidationError("label counts must be positive");
  }
  Dataset data;
  const int max_labels = *std::max_element(spec.label_counts.begin(), spec.label_counts.end());
  for (int l = 0; l < max_labels; ++l) data.vocab.intern(std::to_string(l));
  const auto bases = random_graphs(spec.base_count, spec.min_nodes, spec.max_nodes, spec.extra_edge_prob,
                                   spec.label_counts, derive_seed(spec.seed, 0));
  std::vector<int> per_base;
  for (std::size_t i = 0; i < bases.size(); ++i) per_base.push_back(spec.label_counts[i % spec.label_counts.size()]);
  data.pairs = build_synthetic_corpus(bases, derive_seed(spec.seed, 1), spec.corpus, per_base);
  return data;
}

}  // namespace diffged
