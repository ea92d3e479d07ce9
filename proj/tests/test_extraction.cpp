#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "diffged/edit_path.hpp"
#include "diffged/error.hpp"
#include "diffged/extraction.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace diffged;

namespace {

MatchingMatrix<double> random_matrix(Rng& rng, int rows, int cols) {
  MatchingMatrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng);
  return m;
}

bool injective(const NodeMapping& f, int cols) {
  std::vector<bool> used(static_cast<std::size_t>(cols), false);
  for (int x : f) {
    if (x < 0 || x >= cols || used[static_cast<std::size_t>(x)]) return false;
    used[static_cast<std::size_t>(x)] = true;
  }
  return true;
}

}  // namespace

TEST(Extraction, IdentityMatrix) {
  MatchingMatrix<double> m = MatchingMatrix<double>::Identity(5, 5);
  const NodeMapping id = {0, 1, 2, 3, 4};
  EXPECT_EQ(greedy_extract(m), id);
  EXPECT_EQ(hungarian_extract(m), id);
}

TEST(Extraction, AllEqualPicksLowestIndices) {
  MatchingMatrix<double> m = MatchingMatrix<double>::Constant(4, 6, 0.5);
  EXPECT_EQ(greedy_extract(m), (NodeMapping{0, 1, 2, 3}));
  NodeMapping h = hungarian_extract(m);
  EXPECT_TRUE(injective(h, 6));
}

TEST(Extraction, GreedyCanBeSuboptimal) {
  MatchingMatrix<double> m(2, 2);
  m << 0.9, 0.8, 0.85, 0.1;
  NodeMapping g = greedy_extract(m);
  NodeMapping h = hungarian_extract(m);
  EXPECT_EQ(g, (NodeMapping{0, 1}));
  EXPECT_EQ(h, (NodeMapping{1, 0}));
  EXPECT_DOUBLE_EQ(mapping_weight(m, g), 1.0);
  EXPECT_DOUBLE_EQ(mapping_weight(m, h), 1.65);
}

TEST(Extraction, HungarianMatchesEnumeration) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = static_cast<int>(uniform_int(rng, 1, 4));
    const int cols = rows + static_cast<int>(uniform_int(rng, 0, 2));
    MatchingMatrix<double> m = random_matrix(rng, rows, cols);
    NodeMapping h = hungarian_extract(m);
    NodeMapping g = greedy_extract(m);
    ASSERT_TRUE(injective(h, cols));
    ASSERT_TRUE(injective(g, cols));
    const double best = oracle::best_assignment_weight(m);
    EXPECT_NEAR(mapping_weight(m, h), best, 1e-12);
    EXPECT_LE(mapping_weight(m, g), mapping_weight(m, h) + 1e-12);
  }
}

TEST(Extraction, FloatMatrices) {
  MatchingMatrix<float> m(2, 3);
  m << 0.1f, 0.7f, 0.2f, 0.6f, 0.65f, 0.0f;
  EXPECT_EQ(greedy_extract(m), (NodeMapping{1, 0}));
  EXPECT_EQ(hungarian_extract(m), (NodeMapping{1, 0}));
}

TEST(Extraction, SparseFixtureGivesGed3) {
  GraphPair pair = fixture::ged3_pair();
  MatchingMatrix<double> m = fixture::ged3_sparse_prediction();
  NodeMapping g = greedy_extract(m);
  EXPECT_EQ(g, hungarian_extract(m));
  EXPECT_EQ(g, (NodeMapping{0, 1, 2}));
  EXPECT_EQ(edit_cost(pair, g), 3);
}

TEST(Extraction, RejectsBadInput) {
  EXPECT_THROW(greedy_extract(MatchingMatrix<double>(MatchingMatrix<double>::Zero(3, 2))), ValidationError);
  EXPECT_THROW(hungarian_extract(MatchingMatrix<double>(MatchingMatrix<double>::Zero(3, 2))), ValidationError);
  MatchingMatrix<double> m = MatchingMatrix<double>::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(hungarian_extract(m), ValidationError);
  EXPECT_THROW(parse_extraction_method("auction"), ValidationError);
  EXPECT_EQ(parse_extraction_method("hungarian"), ExtractionMethod::hungarian);
  EXPECT_EQ(to_string(ExtractionMethod::greedy), "greedy");
}

TEST(Extraction, EmptyRows) {
  EXPECT_TRUE(greedy_extract(MatchingMatrix<double>(0, 3)).empty());
  EXPECT_TRUE(hungarian_extract(MatchingMatrix<double>(0, 3)).empty());
}

TEST(Extraction, ParallelKeepsOrder) {
  Rng rng(8);
  std::vector<MatchingMatrix<double>> batch;
  for (int i = 0; i < 100; ++i) batch.push_back(random_matrix(rng, 6, 8));
  for (auto method : {ExtractionMethod::greedy, ExtractionMethod::hungarian}) {
    for (std::size_t workers : {std::size_t{1}, std::size_t{4}}) {
      auto out = parallel_extract(batch, method, workers);
      ASSERT_EQ(out.size(), batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(out[i], extract(batch[i], method));
    }
  }
}
