#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dcscreen/baselines.hpp"
#include "test_helpers.hpp"

using namespace dcscreen;
using dcscreen::test_support::random_normal;

namespace {

// Literal double sum over (i, j), on the n - 1 standardized column.
std::vector<double> sirs_reference(const Matrix& x, const Matrix& y) {
  const std::size_t n = x.rows();
  std::vector<double> out;
  for (std::size_t k = 0; k < x.cols(); ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, k);
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, k) - mean) * (x(i, k) - mean);
    const double sd = std::sqrt(ss / (n - 1));
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double inner = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (y(i, 0) < y(j, 0)) inner += (sd > 0 ? (x(i, k) - mean) / sd : 0.0);
      inner /= n;
      acc += inner * inner;
    }
    out.push_back(acc / n);
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(Sis, PerfectCorrelationEitherSign) {
  std::mt19937_64 rng(1);
  auto x = random_normal(30, 4, rng);
  const auto y = random_normal(30, 1, rng);
  for (std::size_t i = 0; i < 30; ++i) {
    x(i, 0) = y(i, 0);
    x(i, 1) = -y(i, 0);
    x(i, 2) = 7.0;
  }
  const auto u = sis_utilities(Dataset(x, y));
  EXPECT_NEAR(u[0], 1.0, 1e-12);
  EXPECT_NEAR(u[1], 1.0, 1e-12);
  EXPECT_EQ(u[2], 0.0);
  EXPECT_GE(u[3], 0.0);
  EXPECT_LE(u[3], 1.0);
}

TEST(Sis, AffineInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coef(-20.0, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_normal(40, 3, rng);
    Matrix y(40, 1);
    for (std::size_t i = 0; i < 40; ++i) y(i, 0) = x(i, 0) + 0.5 * x(i, 1) + 0.1 * i;
    const auto before = sis_utilities(Dataset(x, y));
    double slope = coef(rng);
    if (std::abs(slope) < 0.1) slope = 1.5;
    const double shift = coef(rng);
    for (double& v : x.col(trial % 3)) v = slope * v + shift;
    const auto after = sis_utilities(Dataset(x, y));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(before[k], after[k], 1e-12);
  }
}

TEST(Baselines, RejectMultivariateResponseAndGroups) {
  std::mt19937_64 rng(3);
  const Dataset multi(random_normal(20, 3, rng), random_normal(20, 2, rng));
  EXPECT_EQ(code_of([&] { sis_utilities(multi); }), ErrorCode::UnsupportedResponse);
  EXPECT_EQ(code_of([&] { sirs_utilities(multi); }), ErrorCode::UnsupportedResponse);
  const Dataset grouped(random_normal(20, 3, rng), random_normal(20, 1, rng), {{{0, 1}}, {{2}}});
  EXPECT_EQ(code_of([&] { sis_utilities(grouped); }), ErrorCode::UnsupportedGrouping);
  EXPECT_EQ(code_of([&] { sirs_utilities(grouped); }), ErrorCode::UnsupportedGrouping);
}

TEST(Sirs, MatchesLiteralDoubleSum) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + trial * 7;
    auto x = random_normal(n, 4, rng);
    auto y = random_normal(n, 1, rng);
    if (trial % 3 == 0)  // introduce ties in y
      for (std::size_t i = 0; i < n; ++i) y(i, 0) = std::round(y(i, 0) * 2.0);
    for (double& v : x.col(3)) v = -1.25;
    const auto fast = sirs_utilities(Dataset(x, y));
    const auto ref = sirs_reference(x, y);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(fast[k], ref[k], 1e-12 * std::max(1.0, ref[k]));
    EXPECT_EQ(fast[3], 0.0);
  }
}

TEST(Sirs, InvariantUnderIncreasingResponseTransform) {
  std::mt19937_64 rng(5);
  const auto x = random_normal(80, 6, rng);
  const auto y = random_normal(80, 1, rng);
  Matrix ty(80, 1);
  for (std::size_t i = 0; i < 80; ++i) ty(i, 0) = std::exp(3.0 * y(i, 0)) + 2.0;
  EXPECT_EQ(sirs_utilities(Dataset(x, y)), sirs_utilities(Dataset(x, ty)));
}

TEST(Sirs, DependentColumnOutranksIndependentOne) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  int wins = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto x = random_normal(1000, 2, rng);
    Matrix y(1000, 1);
    for (std::size_t i = 0; i < 1000; ++i) y(i, 0) = 0.5 * x(i, 0) + normal(rng);
    const auto u = sirs_utilities(Dataset(x, y));
    if (u[0] > u[1]) ++wins;
  }
  EXPECT_GE(wins, 95);
}

TEST(Sirs, NoiselessMonotoneResponseIsMaximal) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_normal(100, 8, rng);
    Matrix y(100, 1);
    for (std::size_t i = 0; i < 100; ++i) y(i, 0) = std::atan(x(i, 0)) + x(i, 0) * x(i, 0) * x(i, 0);
    const auto u = sirs_utilities(Dataset(x, y));
    for (std::size_t k = 1; k < 8; ++k) EXPECT_GT(u[0], u[k]);
  }
}

TEST(Baselines, WorkerCountDoesNotChangeValues) {
  std::mt19937_64 rng(8);
  const Dataset d(random_normal(60, 25, rng), random_normal(60, 1, rng));
  EXPECT_EQ(sis_utilities(d, 1), sis_utilities(d, 4));
  EXPECT_EQ(sirs_utilities(d, 1), sirs_utilities(d, 4));
}
