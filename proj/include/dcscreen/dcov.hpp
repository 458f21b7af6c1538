#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dcscreen/error.hpp"
#include "dcscreen/matrix.hpp"

namespace dcscreen {

/// Marginal dcov^2 at or below this is treated as a degenerate (constant)
/// sample, for which distance correlation is undefined.
inline constexpr double kDegenerateVariance = 1e-14;

/// Sample moments and the distance covariances / correlation built on them.
/// s1_hat, s2_hat and s3_hat are the V-statistic moment estimates for the
/// (u, v) pair; dcov2_* are squared sample distance covariances.
struct DistanceStats {
  double s1_hat = 0.0;
  double s2_hat = 0.0;
  double s3_hat = 0.0;
  double dcov2_uv = 0.0;
  double dcov2_uu = 0.0;
  double dcov2_vv = 0.0;
  /// dcov(u,v) / sqrt(dcov(u,u) dcov(v,v)); empty when either marginal is
  /// degenerate.
  std::optional<double> dcorr;

  /// Squared distance correlation, the screening utility; 0 when undefined.
  double dcorr_squared() const noexcept { return dcorr ? *dcorr * *dcorr : 0.0; }
};

/// Euclidean distances between the rows of an n x d sample.
inline Matrix pairwise_distances(const Matrix& sample) {
  const std::size_t n = sample.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double ss = 0.0;
      for (std::size_t c = 0; c < sample.cols(); ++c) {
        const double diff = sample(i, c) - sample(j, c);
        ss += diff * diff;
      }
      out(i, j) = out(j, i) = std::sqrt(ss);
    }
  }
  return out;
}

namespace detail {

/// |x_i - x_j| for a single column.
struct ScalarDistance {
  const double* x;
  double operator()(std::size_t i, std::size_t j) const noexcept { return std::abs(x[i] - x[j]); }
};

/// Euclidean distance between rows of a row-major packed n x d buffer.
struct PackedDistance {
  const double* rows;
  std::size_t d;
  double operator()(std::size_t i, std::size_t j) const noexcept {
    const double* a = rows + i * d;
    const double* b = rows + j * d;
    double ss = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = a[c] - b[c];
      ss += diff * diff;
    }
    return std::sqrt(ss);
  }
};

/// Lookup into a row-major n x n distance table.
struct TableDistance {
  const double* table;
  std::size_t n;
  double operator()(std::size_t i, std::size_t j) const noexcept { return table[i * n + j]; }
};

inline std::vector<double> pack_rows(const Matrix& m, std::span<const std::size_t> cols) {
  std::vector<double> packed(m.rows() * cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    auto c = m.col(cols[k]);
    for (std::size_t i = 0; i < m.rows(); ++i) packed[i * cols.size() + k] = c[i];
  }
  return packed;
}

inline std::vector<std::size_t> all_columns(const Matrix& m) {
  std::vector<std::size_t> cols(m.cols());
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
  return cols;
}

inline double clamp_nonnegative(double v) noexcept { return v < 0.0 ? 0.0 : v; }

inline std::optional<double> distance_correlation(double uv, double uu, double vv) {
  if (uu <= kDegenerateVariance || vv <= kDegenerateVariance) return std::nullopt;
  return std::sqrt(clamp_nonnegative(uv) / std::sqrt(uu * vv));
}

}  // namespace detail

/// The distance structure of one sample, reusable against many partners:
/// ordered-pair totals of d_ij and d_ij^2, per-row sums, and (for moderate n)
/// the full distance table. Screening builds this once for the response.
class DistanceProfile {
 public:
  static constexpr std::size_t kDefaultCacheLimit = 4096;

  explicit DistanceProfile(const Matrix& sample, std::size_t cache_limit = kDefaultCacheLimit)
      : n_(sample.rows()), d_(sample.cols()) {
    if (d_ == 0) throw Error(ErrorCode::InvalidArgument, "sample has no columns");
    if (d_ == 1) {
      auto c = sample.col(0);
      packed_.assign(c.begin(), c.end());
    } else {
      packed_ = detail::pack_rows(sample, detail::all_columns(sample));
    }
    if (n_ <= cache_limit) table_.assign(n_ * n_, 0.0);

    row_sums_.assign(n_, 0.0);
    const detail::PackedDistance dist{packed_.data(), d_};
    for (std::size_t i = 0; i < n_; ++i) {
      double row = 0.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double b = dist(i, j);
        row += b;
        row_sums_[j] += b;
        total_ += b;
        total_sq_ += b * b;
        if (!table_.empty()) table_[i * n_ + j] = table_[j * n_ + i] = b;
      }
      row_sums_[i] += row;
    }
    total_ *= 2.0;
    total_sq_ *= 2.0;

    const double n = static_cast<double>(n_);
    double s3 = 0.0;
    for (double r : row_sums_) s3 += r * r;
    s1_self_ = total_sq_ / (n * n);
    s2_self_ = (total_ / (n * n)) * (total_ / (n * n));
    s3_self_ = s3 / (n * n * n);
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }
  bool cached() const noexcept { return !table_.empty(); }
  /// Sum over all ordered pairs (i, j) of d_ij.
  double total() const noexcept { return total_; }
  std::span<const double> row_sums() const noexcept { return row_sums_; }
  /// Squared sample distance variance dcov^2(v, v), clamped at zero.
  double dcov2_self() const noexcept { return detail::clamp_nonnegative(s1_self_ + s2_self_ - 2.0 * s3_self_); }

  /// Invokes fn with a distance functor over this sample.
  template <typename Fn>
  decltype(auto) visit(Fn&& fn) const {
    if (cached()) return fn(detail::TableDistance{table_.data(), n_});
    if (d_ == 1) return fn(detail::ScalarDistance{packed_.data()});
    return fn(detail::PackedDistance{packed_.data(), d_});
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> packed_;
  std::vector<double> table_;
  std::vector<double> row_sums_;
  double total_ = 0.0;
  double total_sq_ = 0.0;
  double s1_self_ = 0.0;
  double s2_self_ = 0.0;
  double s3_self_ = 0.0;
};

namespace detail {

// One pass over the upper triangle. S3 uses the row-sum factorization
// n^-3 sum_l (sum_i A_il)(sum_j B_jl), which is O(n^2).
template <typename DistU, typename DistV>
DistanceStats dcov2_pass(std::size_t n, DistU du, DistV dv, const DistanceProfile& v) {
  std::vector<double> row_u(n, 0.0);
  double sum_ab = 0.0;
  double sum_a = 0.0;
  double sum_aa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    double ab = 0.0;
    double aa = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = du(i, j);
      const double b = dv(i, j);
      ab += a * b;
      aa += a * a;
      row += a;
      row_u[j] += a;
    }
    row_u[i] += row;
    sum_ab += ab;
    sum_aa += aa;
    sum_a += row;
  }

  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double nnn = nn * static_cast<double>(n);
  const auto row_v = v.row_sums();
  double cross = 0.0;
  double self = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    cross += row_u[l] * row_v[l];
    self += row_u[l] * row_u[l];
  }

  DistanceStats s;
  const double mean_a = 2.0 * sum_a / nn;
  s.s1_hat = 2.0 * sum_ab / nn;
  s.s2_hat = mean_a * (v.total() / nn);
  s.s3_hat = cross / nnn;
  s.dcov2_uv = s.s1_hat + s.s2_hat - 2.0 * s.s3_hat;
  s.dcov2_uu = clamp_nonnegative(2.0 * sum_aa / nn + mean_a * mean_a - 2.0 * self / nnn);
  s.dcov2_vv = v.dcov2_self();
  s.dcorr = distance_correlation(s.dcov2_uv, s.dcov2_uu, s.dcov2_vv);
  return s;
}

}  // namespace detail

/// Distance statistics between the listed columns of `x` (one multivariate
/// sample) and a precomputed partner profile.
inline DistanceStats dcov2_sample(const Matrix& x, std::span<const std::size_t> cols, const DistanceProfile& v) {
  const std::size_t n = x.rows();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "distance covariance needs n >= 2");
  if (n != v.n())
    throw Error(ErrorCode::DimensionMismatch,
                "row counts differ: " + std::to_string(n) + " vs " + std::to_string(v.n()));
  if (cols.empty()) throw Error(ErrorCode::InvalidArgument, "empty column set");
  if (cols.size() == 1) {
    const detail::ScalarDistance du{x.col(cols[0]).data()};
    return v.visit([&](auto dv) { return detail::dcov2_pass(n, du, dv, v); });
  }
  const auto packed = detail::pack_rows(x, cols);
  const detail::PackedDistance du{packed.data(), cols.size()};
  return v.visit([&](auto dv) { return detail::dcov2_pass(n, du, dv, v); });
}

inline DistanceStats dcov2_sample(const Matrix& u, const DistanceProfile& v) {
  const auto cols = detail::all_columns(u);
  return dcov2_sample(u, cols, v);
}

/// O(n^2) distance statistics between two samples with equal row counts.
inline DistanceStats dcov2_sample(const Matrix& u, const Matrix& v) {
  if (u.rows() < 2 || v.rows() < 2) throw Error(ErrorCode::TooFewSamples, "distance covariance needs n >= 2");
  if (u.rows() != v.rows())
    throw Error(ErrorCode::DimensionMismatch,
                "row counts differ: " + std::to_string(u.rows()) + " vs " + std::to_string(v.rows()));
  return dcov2_sample(u, DistanceProfile(v));
}

/// Reference implementation: full distance matrices and the literal triple
/// sum for S3. O(n^3); intended for n up to a few hundred.
inline DistanceStats dcov2_sample_naive(const Matrix& u, const Matrix& v) {
  if (u.rows() < 2 || v.rows() < 2) throw Error(ErrorCode::TooFewSamples, "distance covariance needs n >= 2");
  if (u.rows() != v.rows())
    throw Error(ErrorCode::DimensionMismatch,
                "row counts differ: " + std::to_string(u.rows()) + " vs " + std::to_string(v.rows()));
  const std::size_t n = u.rows();
  const Matrix a = pairwise_distances(u);
  const Matrix b = pairwise_distances(v);

  struct Moments {
    double s1, s2, s3;
  };
  auto moments = [n](const Matrix& p, const Matrix& q) {
    double s1 = 0.0, sp = 0.0, sq = 0.0, s3 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        s1 += p(i, j) * q(i, j);
        sp += p(i, j);
        sq += q(i, j);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) s3 += p(i, l) * q(j, l);
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    return Moments{s1 / nn, (sp / nn) * (sq / nn), s3 / (nn * static_cast<double>(n))};
  };

  const Moments uv = moments(a, b);
  const Moments uu = moments(a, a);
  const Moments vv = moments(b, b);

  DistanceStats s;
  s.s1_hat = uv.s1;
  s.s2_hat = uv.s2;
  s.s3_hat = uv.s3;
  s.dcov2_uv = uv.s1 + uv.s2 - 2.0 * uv.s3;
  s.dcov2_uu = detail::clamp_nonnegative(uu.s1 + uu.s2 - 2.0 * uu.s3);
  s.dcov2_vv = detail::clamp_nonnegative(vv.s1 + vv.s2 - 2.0 * vv.s3);
  s.dcorr = detail::distance_correlation(s.dcov2_uv, s.dcov2_uu, s.dcov2_vv);
  return s;
}

}  // namespace dcscreen
