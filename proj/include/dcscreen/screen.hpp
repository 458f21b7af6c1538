#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "dcscreen/dataset.hpp"
#include "dcscreen/dcov.hpp"
#include "dcscreen/error.hpp"
#include "dcscreen/parallel.hpp"

namespace dcscreen {

/// Keep the d highest-ranked blocks.
struct TopD {
  std::size_t d = 1;
  friend bool operator==(const TopD&, const TopD&) = default;
};

/// Keep every block whose utility is at least c * n^-kappa.
struct Threshold {
  double c = 0.0;
  double kappa = 0.0;
  friend bool operator==(const Threshold&, const Threshold&) = default;
};

using SelectionRule = std::variant<TopD, Threshold>;

/// Ranking and selection over G blocks. All indices are 0-based block indices.
struct ScreeningResult {
  std::vector<double> utilities;
  std::vector<std::size_t> ranking;   // utilities non-increasing, ties by lower index
  std::vector<std::size_t> selected;  // in rank order
  SelectionRule rule;
  std::vector<std::size_t> degenerate;  // blocks whose distance correlation was undefined
};

struct UtilityScan {
  std::vector<double> utilities;
  std::vector<std::size_t> degenerate;
};

/// Squared sample distance correlation between every feature block and the
/// full response. Blocks with a degenerate marginal get utility 0 and are
/// listed in `degenerate`. The response distance profile is built once and
/// shared by all workers; each worker writes only its own slot.
inline UtilityScan dcsis_scan(const Dataset& data, std::size_t workers = 1) {
  const DistanceProfile response(data.y());
  const std::size_t g_count = data.num_blocks();
  std::vector<double> utilities(g_count, 0.0);
  std::vector<char> undefined(g_count, 0);
  parallel_for(g_count, workers, [&](std::size_t g) {
    const auto stats = dcov2_sample(data.x(), data.block(g).columns, response);
    utilities[g] = stats.dcorr_squared();
    undefined[g] = stats.dcorr ? 0 : 1;
  });
  UtilityScan scan{std::move(utilities), {}};
  for (std::size_t g = 0; g < g_count; ++g)
    if (undefined[g]) scan.degenerate.push_back(g);
  return scan;
}

inline std::vector<double> dcsis_utilities(const Dataset& data, std::size_t workers = 1) {
  return dcsis_scan(data, workers).utilities;
}

/// Block indices ordered by utility, highest first; equal utilities keep
/// ascending index order.
inline std::vector<std::size_t> rank_by_utility(const std::vector<double>& utilities) {
  std::vector<std::size_t> order(utilities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return utilities[a] > utilities[b]; });
  return order;
}

/// Ranks utilities and applies the rule. `n` is the sample size behind the
/// utilities and only matters for Threshold.
inline ScreeningResult rank_and_select(std::vector<double> utilities, const SelectionRule& rule, std::size_t n = 0) {
  if (utilities.empty()) throw Error(ErrorCode::InvalidArgument, "no utilities to rank");
  for (double u : utilities)
    if (!std::isfinite(u) || u < 0.0) throw Error(ErrorCode::InvalidArgument, "utilities must be finite and >= 0");

  ScreeningResult result;
  result.ranking = rank_by_utility(utilities);
  result.rule = rule;

  if (const auto* top = std::get_if<TopD>(&rule)) {
    if (top->d == 0 || top->d > utilities.size())
      throw Error(ErrorCode::InvalidArgument,
                  "d=" + std::to_string(top->d) + " outside 1.." + std::to_string(utilities.size()));
    result.selected.assign(result.ranking.begin(), result.ranking.begin() + static_cast<std::ptrdiff_t>(top->d));
  } else {
    const auto& th = std::get<Threshold>(rule);
    if (!(th.c > 0.0) || !(th.kappa >= 0.0 && th.kappa < 0.5))
      throw Error(ErrorCode::InvalidArgument, "threshold rule needs c > 0 and 0 <= kappa < 0.5");
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "threshold rule needs the sample size");
    const double cut = th.c * std::pow(static_cast<double>(n), -th.kappa);
    for (std::size_t g : result.ranking)
      if (utilities[g] >= cut) result.selected.push_back(g);
  }
  result.utilities = std::move(utilities);
  return result;
}

/// DC-SIS end to end: utilities, ranking, selection.
inline ScreeningResult dcsis_screen(const Dataset& data, const SelectionRule& rule, std::size_t workers = 1) {
  auto scan = dcsis_scan(data, workers);
  auto result = rank_and_select(std::move(scan.utilities), rule, data.n());
  result.degenerate = std::move(scan.degenerate);
  return result;
}

/// multiplier * floor(n / ln n).
inline std::size_t cutoff_d(std::size_t n, std::size_t multiplier = 1) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "cutoff needs n >= 3");
  if (multiplier == 0) throw Error(ErrorCode::InvalidArgument, "cutoff multiplier must be positive");
  const double nd = static_cast<double>(n);
  return multiplier * static_cast<std::size_t>(std::floor(nd / std::log(nd)));
}

/// Population distance correlation of a bivariate normal pair with Pearson
/// correlation rho. Strictly increasing in |rho|, 0 at rho = 0, 1 at |rho| = 1.
inline double t0_of_rho(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw Error(ErrorCode::InvalidArgument, "|rho| must be <= 1");
  using std::numbers::pi;
  const double num = rho * std::asin(rho) + std::sqrt(1.0 - rho * rho) - rho * std::asin(rho / 2.0) -
                     std::sqrt(4.0 - rho * rho) + 1.0;
  const double den = 1.0 + pi / 3.0 - std::sqrt(3.0);
  return std::sqrt(std::max(0.0, num / den));
}

}  // namespace dcscreen
