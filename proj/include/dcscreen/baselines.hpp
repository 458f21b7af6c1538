#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "dcscreen/dataset.hpp"
#include "dcscreen/error.hpp"
#include "dcscreen/parallel.hpp"

namespace dcscreen {

namespace detail {

inline void require_scalar_design(const Dataset& data, const char* method) {
  if (data.q() != 1)
    throw Error(ErrorCode::UnsupportedResponse,
                std::string(method) + " needs a single response column, got q=" + std::to_string(data.q()));
  if (!data.all_singletons())
    throw Error(ErrorCode::UnsupportedGrouping, std::string(method) + " cannot screen grouped predictors");
}

}  // namespace detail

/// |Pearson correlation| of each predictor with the response (SIS).
/// Zero-variance columns score 0.
inline std::vector<double> sis_utilities(const Dataset& data, std::size_t workers = 1) {
  detail::require_scalar_design(data, "SIS");
  const std::size_t n = data.n();
  const auto y = data.y().col(0);
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> yc(n);
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    yc[i] = y[i] - y_mean;
    syy += yc[i] * yc[i];
  }

  std::vector<double> out(data.p(), 0.0);
  if (syy <= 0.0) return out;
  parallel_for(data.p(), workers, [&](std::size_t k) {
    const auto x = data.x().col(k);
    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = x[i] - x_mean;
      sxy += dx * yc[i];
      sxx += dx * dx;
    }
    if (sxx <= 1e-28 * std::max(1.0, x_mean * x_mean) * static_cast<double>(n)) return;
    out[k] = std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
  });
  return out;
}

/// SIRS marginal utility (Zhu, Li, Li and Zhu 2011):
///   w_k = (1/n) sum_j [ (1/n) sum_i xs_ik 1(Y_i < Y_j) ]^2
/// where xs is the column standardized with the n - 1 denominator. The strict
/// inequality means tied responses contribute nothing to each other. Computed
/// in O(n log n + n p) via prefix sums over the response order.
inline std::vector<double> sirs_utilities(const Dataset& data, std::size_t workers = 1) {
  detail::require_scalar_design(data, "SIRS");
  const auto standardized = standardize_columns(data);
  const Matrix& xs = standardized.data.x();
  const std::size_t n = data.n();
  const auto y = data.y().col(0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  // below[r] = number of sorted positions strictly less than the value at r
  std::vector<std::size_t> below(n);
  for (std::size_t r = 0; r < n; ++r)
    below[r] = (r > 0 && y[order[r]] == y[order[r - 1]]) ? below[r - 1] : r;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> out(data.p(), 0.0);
  parallel_for(data.p(), workers, [&](std::size_t k) {
    const auto x = xs.col(k);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t r = 0; r < n; ++r) prefix[r + 1] = prefix[r] + x[order[r]];
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double inner = prefix[below[r]] * inv_n;
      acc += inner * inner;
    }
    out[k] = acc * inv_n;
  });
  return out;
}

}  // namespace dcscreen
