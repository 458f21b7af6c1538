#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dcscreen/dcov.hpp"
#include "test_helpers.hpp"

using namespace dcscreen;
using dcscreen::test_support::random_normal;

namespace {

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.begin()->size();
  Matrix m(n, d);
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t c = 0;
    for (double v : r) m(i, c++) = v;
    ++i;
  }
  return m;
}

void expect_rel(double a, double b, double tol) {
  EXPECT_LE(std::abs(a - b), tol * std::max({1.0, std::abs(a), std::abs(b)})) << a << " vs " << b;
}

void expect_stats_near(const DistanceStats& a, const DistanceStats& b, double tol) {
  expect_rel(a.s1_hat, b.s1_hat, tol);
  expect_rel(a.s2_hat, b.s2_hat, tol);
  expect_rel(a.s3_hat, b.s3_hat, tol);
  expect_rel(a.dcov2_uv, b.dcov2_uv, tol);
  expect_rel(a.dcov2_uu, b.dcov2_uu, tol);
  expect_rel(a.dcov2_vv, b.dcov2_vv, tol);
  ASSERT_EQ(a.dcorr.has_value(), b.dcorr.has_value());
  if (a.dcorr) expect_rel(*a.dcorr, *b.dcorr, tol);
}

}  // namespace

TEST(PairwiseDistances, OneDimensional) {
  const auto d = pairwise_distances(rows_of({{0}, {3}}));
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_EQ(d(0, 1), 3.0);
  EXPECT_EQ(d(1, 0), 3.0);
  EXPECT_EQ(d(1, 1), 0.0);
}

TEST(PairwiseDistances, PythagoreanTriple) {
  const auto d = pairwise_distances(rows_of({{0, 0}, {3, 4}}));
  EXPECT_EQ(d(0, 1), 5.0);
  EXPECT_EQ(d(1, 0), 5.0);
}

TEST(PairwiseDistances, RowPermutationPermutesMatrix) {
  std::mt19937_64 rng(3);
  const auto x = random_normal(12, 3, rng);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix px(12, 3);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t c = 0; c < 3; ++c) px(i, c) = x(perm[i], c);
  const auto d = pairwise_distances(x);
  const auto pd = pairwise_distances(px);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(pd(i, j), d(perm[i], perm[j]));
}

TEST(Dcov2Sample, TwoPointHandEvaluation) {
  // a = 1, b = 2: S1 = ab/2, S2 = ab/4, S3 = ab/4
  const auto u = rows_of({{0}, {1}});
  const auto v = rows_of({{0}, {2}});
  for (const auto& s : {dcov2_sample(u, v), dcov2_sample_naive(u, v)}) {
    EXPECT_DOUBLE_EQ(s.s1_hat, 1.0);
    EXPECT_DOUBLE_EQ(s.s2_hat, 0.5);
    EXPECT_DOUBLE_EQ(s.s3_hat, 0.5);
    EXPECT_DOUBLE_EQ(s.dcov2_uv, 0.5);
    ASSERT_TRUE(s.dcorr.has_value());
    EXPECT_DOUBLE_EQ(*s.dcorr, 1.0);
  }
}

TEST(Dcov2Sample, MatchesDoubleCenteredReference) {
  // Frozen from the double-centering form mean(A_c * B_c), an independent
  // algebraic route to the same V-statistic.
  const auto u = rows_of({{0, 0}, {1, 0}, {0, 2}, {3, 1}, {2, 2}});
  const auto v = rows_of({{1}, {4}, {2}, {8}, {3}});
  const auto s = dcov2_sample(u, v);
  EXPECT_NEAR(s.s1_hat, 6.119200598883626, 1e-12);
  EXPECT_NEAR(s.s2_hat, 4.562001907702868, 1e-12);
  EXPECT_NEAR(s.s3_hat, 4.669595574493989, 1e-12);
  EXPECT_NEAR(s.dcov2_uv, 1.3420113575985162, 1e-12);
  EXPECT_NEAR(s.dcov2_uu, 1.0962147978742707, 1e-12);
  EXPECT_NEAR(s.dcov2_vv, 3.2895999999999996, 1e-12);
  EXPECT_NEAR(*s.dcorr, 0.8406561748508734, 1e-12);
}

TEST(Dcov2Sample, ConstantSampleIsUndefined) {
  std::mt19937_64 rng(5);
  const Matrix u(20, 1, 3.5);
  const auto v = random_normal(20, 2, rng);
  const auto s = dcov2_sample(u, v);
  EXPECT_EQ(s.dcov2_uu, 0.0);
  EXPECT_FALSE(s.dcorr.has_value());
  EXPECT_EQ(s.dcorr_squared(), 0.0);
  EXPECT_FALSE(dcov2_sample_naive(u, v).dcorr.has_value());
}

TEST(Dcov2Sample, SelfCorrelationIsOne) {
  std::mt19937_64 rng(9);
  for (std::size_t d : {1u, 2u, 4u}) {
    const auto u = random_normal(40, d, rng);
    const auto s = dcov2_sample(u, u);
    ASSERT_TRUE(s.dcorr.has_value());
    EXPECT_NEAR(*s.dcorr, 1.0, 1e-12);
  }
}

TEST(Dcov2Sample, DuplicatedRowAgreesWithNaive) {
  const auto u = rows_of({{1.0}, {1.0}, {4.0}});
  const auto v = rows_of({{0.5, 1.0}, {0.5, 1.0}, {2.0, -1.0}});
  const auto fast = dcov2_sample(u, v);
  expect_stats_near(fast, dcov2_sample_naive(u, v), 1e-12);
  EXPECT_TRUE(fast.dcorr.has_value());
}

TEST(Dcov2Sample, ErrorPaths) {
  EXPECT_THROW(dcov2_sample(Matrix(1, 1), Matrix(1, 1)), Error);
  EXPECT_THROW(dcov2_sample(Matrix(3, 1), Matrix(4, 1)), Error);
  EXPECT_THROW(dcov2_sample_naive(Matrix(3, 1), Matrix(4, 1)), Error);
  try {
    dcov2_sample(Matrix(3, 1), Matrix(4, 1));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Dcov2Sample, OracleEquivalenceRandom) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> n_dist(2, 100), d_dist(1, 5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = n_dist(rng);
    const auto u = random_normal(n, d_dist(rng), rng);
    const auto v = random_normal(n, d_dist(rng), rng);
    expect_stats_near(dcov2_sample(u, v), dcov2_sample_naive(u, v), 1e-10);
  }
}

TEST(Dcov2Sample, UncachedProfileMatchesCached) {
  std::mt19937_64 rng(41);
  for (std::size_t dv : {1u, 3u}) {
    const auto u = random_normal(60, 2, rng);
    const auto v = random_normal(60, dv, rng);
    const auto cached = dcov2_sample(u, DistanceProfile(v));
    const auto streamed = dcov2_sample(u, DistanceProfile(v, /*cache_limit=*/0));
    expect_stats_near(cached, streamed, 1e-13);
  }
}

TEST(Dcov2Sample, AffineInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-50.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_normal(50, 2, rng);
    auto v = random_normal(50, 1, rng);
    for (std::size_t i = 0; i < 50; ++i) v(i, 0) += u(i, 0) * u(i, 1);
    const double a = scale(rng), b = scale(rng);
    Matrix tu = u, tv = v;
    for (std::size_t c = 0; c < tu.cols(); ++c) {
      const double off = shift(rng);
      for (double& x : tu.col(c)) x = a * x + off;
    }
    const double off = shift(rng);
    for (double& x : tv.col(0)) x = b * x + off;
    EXPECT_NEAR(*dcov2_sample(tu, tv).dcorr, *dcov2_sample(u, v).dcorr, 1e-10);
  }
}

TEST(Dcov2Sample, PermutationInvariance) {
  std::mt19937_64 rng(23);
  const auto u = random_normal(40, 2, rng);
  const auto v = random_normal(40, 2, rng);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix pu(40, 2), pv(40, 2);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      pu(i, c) = u(perm[i], c);
      pv(i, c) = v(perm[i], c);
    }
  expect_stats_near(dcov2_sample(pu, pv), dcov2_sample(u, v), 1e-12);
}

TEST(Dcov2Sample, RangeProperty) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = random_normal(25, 1 + trial % 3, rng);
    auto v = random_normal(25, 1, rng);
    if (trial % 2) v(0, 0) = u(0, 0) * 10.0;
    const auto s = dcov2_sample(u, v);
    ASSERT_TRUE(s.dcorr.has_value());
    EXPECT_GE(*s.dcorr, 0.0);
    EXPECT_LE(*s.dcorr, 1.0 + 1e-12);
    EXPECT_GE(s.dcov2_uu, 0.0);
    EXPECT_GE(s.dcov2_vv, 0.0);
    EXPECT_EQ(s.dcov2_uv, s.s1_hat + s.s2_hat - 2.0 * s.s3_hat);
  }
}

TEST(Dcov2Sample, IndependenceLimit) {
  std::mt19937_64 rng(31);
  int below = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = random_normal(2000, 1, rng);
    const auto v = random_normal(2000, 1, rng);
    if (*dcov2_sample(u, v).dcorr < 0.1) ++below;
  }
  EXPECT_GE(below, 95);
}
