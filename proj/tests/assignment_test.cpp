#include "xcheck/assignment.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace xcheck {
namespace {

using assignment::Matrix;

TEST(Assignment, SquareIdentityPreferred) {
  Matrix w = {{0.9, 0.1}, {0.2, 0.95}};
  auto r = assignment::max_weight(w);
  EXPECT_EQ(r.row_to_col, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(r.total, 0.9 + 0.95);
}

TEST(Assignment, PrefersGlobalOptimumOverGreedy) {
  // greedy would take (0,0)=0.99 then (1,1)=0.1
  Matrix w = {{0.99, 0.98}, {0.97, 0.1}};
  auto r = assignment::max_weight(w);
  EXPECT_EQ(r.row_to_col, (std::vector<int>{1, 0}));
}

TEST(Assignment, RectangularBothWays) {
  Matrix wide = {{0.1, 0.9, 0.3}};
  EXPECT_EQ(assignment::max_weight(wide).row_to_col, (std::vector<int>{1}));
  Matrix tall = {{0.1}, {0.9}, {0.3}};
  EXPECT_EQ(assignment::max_weight(tall).row_to_col, (std::vector<int>{-1, 0, -1}));
}

TEST(Assignment, ZeroWeightsAreNeverReported) {
  Matrix w = {{0.0, 0.0}, {0.0, 0.85}};
  auto r = assignment::max_weight(w);
  EXPECT_EQ(r.row_to_col, (std::vector<int>{-1, 1}));
  EXPECT_TRUE(assignment::max_weight(Matrix{}).row_to_col.empty());
}

TEST(Assignment, TiesBreakToLowestIndices) {
  Matrix w = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  EXPECT_EQ(assignment::max_weight_lexicographic(w).row_to_col, (std::vector<int>{0, 1}));
  Matrix w2 = {{0.0, 0.9, 0.9}, {0.9, 0.9, 0.0}};
  EXPECT_EQ(assignment::max_weight_lexicographic(w2).row_to_col, (std::vector<int>{1, 0}));
}

TEST(Assignment, MatchesBruteForceOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(0, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const int rows = size(rng), cols = size(rng);
    Matrix sim(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
    Matrix w = sim;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        sim[i][j] = u(rng);
        w[i][j] = sim[i][j] >= 0.5 ? sim[i][j] : 0.0;
      }
    const double expected = oracle::brute_force_assignment(sim, 0.5);
    EXPECT_DOUBLE_EQ(assignment::max_weight(w).total, expected);
    EXPECT_EQ(assignment::max_weight_lexicographic(w).total, expected);
  }
}

}  // namespace
}  // namespace xcheck
