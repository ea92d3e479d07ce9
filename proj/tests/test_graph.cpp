#include <gtest/gtest.h>

#include <sstream>

#include "diffged/dataset.hpp"
#include "diffged/edit_path.hpp"
#include "diffged/error.hpp"
#include "diffged/oracle.hpp"
#include "diffged/synthetic.hpp"
#include "fixtures.hpp"

using namespace diffged;

TEST(LabeledGraph, NormalizesEdges) {
  LabeledGraph g(3, {{2, 0}, {1, 0}}, {0, 0, 0});
  ASSERT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{0, 2}));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_FALSE(g.has_edge(1, 2));
  EXPECT_EQ(g.neighbors(0), (std::vector<int>{1, 2}));
}

TEST(LabeledGraph, RejectsInvalidStructure) {
  EXPECT_THROW(LabeledGraph(3, {{1, 1}}, {0, 0, 0}), ValidationError);
  EXPECT_THROW(LabeledGraph(3, {{0, 3}}, {0, 0, 0}), ValidationError);
  EXPECT_THROW(LabeledGraph(3, {{0, 1}, {1, 0}}, {0, 0, 0}), ValidationError);
  EXPECT_THROW(LabeledGraph(3, {}, {0, 0}), ValidationError);
  try {
    LabeledGraph(4, {{3, 3}}, {0, 0, 0, 0});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
}

TEST(GraphPair, OrientationSwapsLargerFirstGraph) {
  LabeledGraph big = LabeledGraph::unlabeled(5, {{0, 1}});
  LabeledGraph small = LabeledGraph::unlabeled(4, {});
  GraphPair p = make_graph_pair(big, small, std::nullopt, std::nullopt);
  EXPECT_TRUE(p.swapped);
  EXPECT_EQ(p.g.node_count(), 4);
  EXPECT_EQ(p.g_prime.node_count(), 5);
  GraphPair q = make_graph_pair(small, big, std::nullopt, std::nullopt);
  EXPECT_FALSE(q.swapped);
}

TEST(GraphPair, RejectsNonInjectiveMapping) {
  LabeledGraph a = LabeledGraph::unlabeled(2, {});
  LabeledGraph b = LabeledGraph::unlabeled(3, {});
  EXPECT_THROW(make_graph_pair(a, b, NodeMapping{1, 1}, std::nullopt), ValidationError);
  EXPECT_THROW(make_graph_pair(a, b, NodeMapping{0, 3}, std::nullopt), ValidationError);
  EXPECT_THROW(make_graph_pair(a, b, NodeMapping{0}, std::nullopt), ValidationError);
}

TEST(OneHotLabels, Examples) {
  LabelVocabulary two({"a", "b"});
  LabeledGraph g(2, {}, {0, 1});
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0, 1;
  EXPECT_EQ(one_hot_labels<double>(g, two), expected);

  LabelVocabulary one({"0"});
  LabeledGraph u = LabeledGraph::unlabeled(3, {{0, 1}});
  EXPECT_EQ(one_hot_labels<double>(u, one), Eigen::MatrixXd::Ones(3, 1));

  LabeledGraph bad(1, {}, {2});
  EXPECT_THROW(one_hot_labels<double>(bad, two), ValidationError);
}

TEST(Dataset, IsomorphicTrianglesRecord) {
  std::istringstream in(
      R"({"g":{"n":3,"edges":[[0,1],[1,2],[0,2]]},"g_prime":{"n":3,"edges":[[0,1],[1,2],[2,0]]},"gt_mapping":null,"gt_ged":0})");
  Dataset d = parse_dataset(in);
  ASSERT_EQ(d.pairs.size(), 1u);
  EXPECT_EQ(d.pairs[0].ground_truth_ged, 0);
  EXPECT_EQ(d.vocab.size(), 1);
  EXPECT_EQ(d.vocab.name(0), "0");
}

TEST(Dataset, SwappedOnLoad) {
  std::istringstream in(
      R"({"g":{"n":5,"edges":[[0,1]]},"g_prime":{"n":4,"edges":[]},"gt_mapping":null,"gt_ged":null})");
  Dataset d = parse_dataset(in);
  EXPECT_TRUE(d.pairs[0].swapped);
  EXPECT_LE(d.pairs[0].g.node_count(), d.pairs[0].g_prime.node_count());
}

TEST(Dataset, SelfLoopIsValidationError) {
  std::istringstream in(R"({"g":{"n":4,"edges":[[3,3]]},"g_prime":{"n":4,"edges":[]}})");
  try {
    parse_dataset(in);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
}

TEST(Dataset, ParseErrorNamesRecord) {
  std::istringstream in(
      "{\"g\":{\"n\":1,\"edges\":[]},\"g_prime\":{\"n\":1,\"edges\":[]}}\n{\"g\":{\"n\":1,\"edges\":[]}\n");
  try {
    parse_dataset(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos) << e.what();
  }
}

TEST(Dataset, DanglingEdgeIsValidationError) {
  std::istringstream in(R"({"g":{"n":2,"edges":[[0,5]]},"g_prime":{"n":2,"edges":[]}})");
  EXPECT_THROW(parse_dataset(in), ValidationError);
}

TEST(Dataset, InconsistentGroundTruthRejected) {
  std::istringstream in(
      R"({"g":{"n":2,"edges":[[0,1]]},"g_prime":{"n":2,"edges":[]},"gt_mapping":[0,1],"gt_ged":3})");
  EXPECT_THROW(parse_dataset(in), ValidationError);
}

TEST(Dataset, RoundTripIsExact) {
  for (std::size_t bases : {1u, 5u, 50u}) {
    Dataset d;
    for (const char* name : {"0", "1", "2"}) d.vocab.intern(name);
    auto graphs = random_graphs(bases, 3, 7, 0.3, {1, 3}, 99 + bases);
    CorpusOptions options;
    options.per_graph = bases == 1 ? 1 : 2;
    d.pairs = build_synthetic_corpus(graphs, 5, options, std::vector<int>(bases, 3));
    // Include a swapped pair without ground truth.
    d.pairs.push_back(make_graph_pair(LabeledGraph(3, {{0, 1}}, {0, 1, 2}), LabeledGraph(2, {}, {2, 2}),
                                      std::nullopt, std::nullopt));
    std::stringstream buffer;
    write_dataset(d, buffer);
    Dataset back = parse_dataset(buffer);
    EXPECT_EQ(back, d) << "corpus with " << bases << " bases";
  }
}

TEST(Dataset, RoundTripSizes) {
  for (std::size_t count : {1u, 10u, 100u}) {
    Dataset d;
    d.vocab.intern("0");
    auto graphs = random_graphs(count, 4, 6, 0.3, {1}, count);
    CorpusOptions options;
    options.per_graph = 1;
    d.pairs = build_synthetic_corpus(graphs, count, options);
    ASSERT_EQ(d.pairs.size(), count);
    std::stringstream buffer;
    write_dataset(d, buffer);
    EXPECT_EQ(parse_dataset(buffer), d);
  }
}

TEST(Synthetic, TriangleDeleteEdge) {
  LabeledGraph triangle = LabeledGraph::unlabeled(3, {{0, 1}, {1, 2}, {0, 2}});
  SyntheticOptions options;
  options.allow_node_insertion = false;
  // Unlabeled and complete: the only legal first edit is an edge deletion.
  GraphPair p = generate_synthetic_pair(triangle, 1, 3, options);
  EXPECT_EQ(p.ground_truth_ged, 1);
  EXPECT_EQ(p.ground_truth_mapping, (NodeMapping{0, 1, 2}));
  EXPECT_EQ(p.g_prime.edge_count(), 2u);
  EXPECT_EQ(edit_cost(p, *p.ground_truth_mapping), 1);
}

TEST(Synthetic, PathP4DeltaThreeIsExact) {
  LabeledGraph p4 = LabeledGraph::unlabeled(4, {{0, 1}, {1, 2}, {2, 3}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GraphPair p = generate_synthetic_pair(p4, 3, seed);
    EXPECT_EQ(exact_ged_bruteforce(p).ged, 3);
    EXPECT_EQ(edit_cost(p, *p.ground_truth_mapping), 3);
  }
}

TEST(Synthetic, TooManyEditsIsGenerationError) {
  LabeledGraph single = LabeledGraph::unlabeled(2, {{0, 1}});
  SyntheticOptions options;
  options.allow_node_insertion = false;
  EXPECT_THROW(generate_synthetic_pair(single, 2, 1, options), GenerationError);
}

TEST(Synthetic, SoundnessOnRandomCorpus) {
  auto graphs = random_graphs(40, 2, 8, 0.3, {1, 3}, 7);
  auto pairs = build_synthetic_corpus(graphs, 8, {}, std::vector<int>{});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    ASSERT_LE(p.g.node_count(), 8);
    EXPECT_EQ(exact_ged_bruteforce(p).ged, *p.ground_truth_ged) << "pair " << i;
    EXPECT_EQ(edit_cost(p, *p.ground_truth_mapping), *p.ground_truth_ged);
  }
}

TEST(Synthetic, SameSeedSameCorpus) {
  auto graphs = random_graphs(10, 4, 8, 0.3, {1, 3}, 1);
  EXPECT_EQ(build_synthetic_corpus(graphs, 3, {}), build_synthetic_corpus(graphs, 3, {}));
  EXPECT_NE(build_synthetic_corpus(graphs, 3, {}), build_synthetic_corpus(graphs, 4, {}));
}

TEST(Synthetic, DeltaRanges) {
  EXPECT_EQ(corpus_delta_range(21), (std::pair<int, int>{1, 10}));
  EXPECT_EQ(corpus_delta_range(15), (std::pair<int, int>{1, 5}));
  EXPECT_EQ(corpus_delta_range(8), (std::pair<int, int>{1, 5}));
}

TEST(Synthetic, LargeBasesUseWideDeltaRange) {
  auto graphs = random_graphs(3, 22, 24, 0.1, {2}, 4);
  CorpusOptions options;
  options.per_graph = 20;
  auto pairs = build_synthetic_corpus(graphs, 9, options, {2, 2, 2});
  int max_delta = 0;
  for (const auto& p : pairs) {
    EXPECT_GE(*p.ground_truth_ged, 1);
    EXPECT_LE(*p.ground_truth_ged, 10);
    EXPECT_EQ(edit_cost(p, *p.ground_truth_mapping), *p.ground_truth_ged);
    max_delta = std::max(max_delta, *p.ground_truth_ged);
  }
  EXPECT_GT(max_delta, 5);
}

TEST(Synthetic, ShuffledTargetsKeepGed) {
  auto graphs = random_graphs(10, 5, 7, 0.3, {3}, 2);
  CorpusOptions plain;
  plain.shuffle_targets = false;
  auto a = build_synthetic_corpus(graphs, 1, plain);
  auto b = build_synthetic_corpus(graphs, 1, {});
  ASSERT_EQ(a.size(), b.size());
  int non_identity = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ground_truth_ged, b[i].ground_truth_ged);
    EXPECT_EQ(edit_cost(b[i], *b[i].ground_truth_mapping), *b[i].ground_truth_ged);
    non_identity += *a[i].ground_truth_mapping != *b[i].ground_truth_mapping;
  }
  EXPECT_GT(non_identity, 0);
}

TEST(LabelVocabulary, RemapByName) {
  LabelVocabulary from({"x", "y"});
  LabelVocabulary to({"y", "z", "x"});
  LabeledGraph g(2, {{0, 1}}, {0, 1});
  LabeledGraph r = remap_labels(g, from, to);
  EXPECT_EQ(r.labels(), (std::vector<int>{2, 0}));
  EXPECT_THROW(remap_labels(g, from, LabelVocabulary({"x"})), ValidationError);
  EXPECT_THROW(LabelVocabulary({"a", "a"}), ValidationError);
}
