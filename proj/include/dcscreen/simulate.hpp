#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dcscreen/dataset.hpp"
#include "dcscreen/error.hpp"
#include "dcscreen/matrix.hpp"
#include "dcscreen/methods.hpp"
#include "dcscreen/parallel.hpp"
#include "dcscreen/screen.hpp"

namespace dcscreen {

using Rng = std::mt19937_64;

/// Generative models of the simulation study. `Null` draws the response
/// independently of every predictor and is used as a convergence baseline.
enum class ModelId { M1a, M1b, M1c, M1d, M2, M3a, M3b, Null };

inline const char* to_string(ModelId m) {
  switch (m) {
    case ModelId::M1a: return "1a";
    case ModelId::M1b: return "1b";
    case ModelId::M1c: return "1c";
    case ModelId::M1d: return "1d";
    case ModelId::M2: return "2";
    case ModelId::M3a: return "3a";
    case ModelId::M3b: return "3b";
    case ModelId::Null: return "null";
  }
  return "unknown";
}

inline std::optional<ModelId> parse_model(std::string_view s) {
  for (auto m : {ModelId::M1a, ModelId::M1b, ModelId::M1c, ModelId::M1d, ModelId::M2, ModelId::M3a, ModelId::M3b,
                 ModelId::Null})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct ModelSpec {
  ModelId model = ModelId::M1a;
  std::size_t n = 200;
  std::size_t p = 2000;
  double rho = 0.5;                            // sigma_ij = rho^|i-j|
  std::array<double, 4> c{2.0, 0.5, 3.0, 2.0};  // c1..c4
  std::uint64_t seed = 1;                       // master seed

  void validate() const {
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "model needs n >= 3");
    if (p < 25) throw Error(ErrorCode::InvalidArgument, "model needs p >= 25 (it references X22)");
    if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (0, 1)");
  }
};

/// Per-replication coefficients. For models 1a-1d and 2,
/// beta_j = (-1)^U_j (a + |Z_j|) with a = 4 ln n / sqrt n, U_j ~ Bernoulli(0.4)
/// and Z_j ~ N(0, 1). Model 3a uses the fixed (0.8, 0.6); model 3b stores
/// 2 - U_j with U_j ~ Uniform[0, 1].
struct CoeffDraw {
  std::array<double, 4> beta{};
  double a = 0.0;
  std::array<bool, 4> u_flags{};
  std::array<double, 4> z{};
};

/// Theoretical quartiles of N(0, 1), the cut-points of the model-2 dummy block.
inline constexpr std::array<double, 3> kNormalQuartiles{-0.6744897501960817, 0.0, 0.6744897501960817};

/// Stateless 64-bit mixer (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`; independent of evaluation order.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) noexcept {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

/// n draws from N(0, Sigma) with sigma_ij = rho^|i-j| via the exact AR(1)
/// recursion X_1 = Z_1, X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j.
inline Matrix sample_ar1_normal(std::size_t n, std::size_t p, double rho, Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (0, 1)");
  std::normal_distribution<double> normal;
  const double innov = std::sqrt(1.0 - rho * rho);
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    double prev = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double z = normal(rng);
      prev = j == 0 ? z : rho * prev + innov * z;
      x(i, j) = prev;
    }
  }
  return x;
}

inline CoeffDraw draw_coefficients(const ModelSpec& spec, Rng& rng) {
  CoeffDraw draw;
  switch (spec.model) {
    case ModelId::M3a:
      draw.beta = {0.8, 0.6, 0.0, 0.0};
      return draw;
    case ModelId::M3b: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (double& b : draw.beta) b = 2.0 - unif(rng);
      return draw;
    }
    case ModelId::Null:
      return draw;
    default:
      break;
  }
  const double n = static_cast<double>(spec.n);
  draw.a = 4.0 * std::log(n) / std::sqrt(n);
  std::bernoulli_distribution bern(0.4);
  std::normal_distribution<double> normal;
  for (std::size_t j = 0; j < 4; ++j) {
    draw.u_flags[j] = bern(rng);
    draw.z[j] = normal(rng);
    draw.beta[j] = (draw.u_flags[j] ? -1.0 : 1.0) * (draw.a + std::abs(draw.z[j]));
  }
  return draw;
}

/// Number of response columns the model produces.
inline std::size_t response_width(ModelId m) { return m == ModelId::M3a || m == ModelId::M3b ? 2 : 1; }

/// Off-diagonal conditional correlation sigma(x) of models 3a / 3b for row i.
inline double conditional_correlation(ModelId model, const Matrix& x, std::size_t i, const CoeffDraw& coeffs) {
  double t = 0.0;
  for (std::size_t j = 0; j < 4; ++j) t += coeffs.beta[j] * x(i, j);
  if (model == ModelId::M3a) return std::sin(t);
  // (e^t - 1) / (e^t + 1)
  return std::tanh(t / 2.0);
}

/// Draws the response for design x. `noise_scale` multiplies the error term of
/// models 1a-1d and 2 (0 gives the deterministic part); it is ignored by the
/// bivariate models, whose randomness is the response itself.
inline Matrix gen_response(const ModelSpec& spec, const Matrix& x, const CoeffDraw& coeffs, Rng& rng,
                           double noise_scale = 1.0) {
  if (x.cols() < 22 && spec.model != ModelId::Null)
    throw Error(ErrorCode::InvalidArgument, "model " + std::string(to_string(spec.model)) +
                                                " references X22 but design has p=" + std::to_string(x.cols()));
  const std::size_t n = x.rows();
  const auto& c = spec.c;
  const auto& b = coeffs.beta;
  std::normal_distribution<double> normal;
  Matrix y(n, response_width(spec.model));
  if (spec.model == ModelId::Null) {
    for (std::size_t i = 0; i < n; ++i) y(i, 0) = normal(rng);
    return y;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = x(i, 0), x2 = x(i, 1), x12 = x(i, 11), x22 = x(i, 21);
    const double ind12 = x12 < 0.0 ? 1.0 : 0.0;
    switch (spec.model) {
      case ModelId::M1a:
        y(i, 0) = c[0] * b[0] * x1 + c[1] * b[1] * x2 + c[2] * b[2] * ind12 + c[3] * b[3] * x22 +
                  noise_scale * normal(rng);
        break;
      case ModelId::M1b:
        y(i, 0) = c[0] * b[0] * x1 * x2 + c[2] * b[1] * ind12 + c[3] * b[2] * x22 + noise_scale * normal(rng);
        break;
      case ModelId::M1c:
        y(i, 0) = c[0] * b[0] * x1 * x2 + c[2] * b[1] * ind12 * x22 + noise_scale * normal(rng);
        break;
      case ModelId::M1d:
        y(i, 0) = c[0] * b[0] * x1 + c[1] * b[1] * x2 + c[2] * b[2] * ind12 +
                  std::exp(c[3] * std::abs(x22)) * noise_scale * normal(rng);
        break;
      case ModelId::M2: {
        const auto& q = kNormalQuartiles;
        const double level = x12 < q[0] ? 1.0 : x12 < q[1] ? 1.5 : x12 < q[2] ? 2.0 : 0.0;
        y(i, 0) = c[0] * b[0] * x1 + c[1] * b[1] * x2 + c[2] * b[2] * level + c[3] * b[3] * x22 +
                  noise_scale * normal(rng);
        break;
      }
      case ModelId::M3a:
      case ModelId::M3b: {
        const double s = conditional_correlation(spec.model, x, i, coeffs);
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        y(i, 0) = z1;
        y(i, 1) = s * z1 + std::sqrt(std::max(0.0, 1.0 - s * s)) * z2;
        break;
      }
      case ModelId::Null:
        break;
    }
  }
  return y;
}

/// Ground-truth active blocks (0-based block indices of the screening design).
inline std::vector<std::size_t> true_active(ModelId m) {
  switch (m) {
    case ModelId::M3a: return {0, 1};
    case ModelId::M3b: return {0, 1, 2, 3};
    case ModelId::Null: return {};
    default: return {0, 1, 11, 21};
  }
}

inline std::vector<std::string> active_labels(ModelId m) {
  switch (m) {
    case ModelId::M3a: return {"X1", "X2"};
    case ModelId::M3b: return {"X1", "X2", "X3", "X4"};
    case ModelId::Null: return {};
    case ModelId::M2: return {"X1", "X2", "X12grp", "X22"};
    default: return {"X1", "X2", "X12", "X22"};
  }
}

/// Turns a raw design and response into the screening dataset. For model 2
/// column X12 is replaced by the three-wide dummy block
/// (1(X12 < q1), 1(q1 <= X12 < q2), 1(q2 <= X12 < q3)), screened as one unit,
/// so block g still corresponds to original variable g.
inline Dataset build_dataset(ModelId model, const Matrix& x, Matrix y) {
  if (model != ModelId::M2) return Dataset(x, std::move(y));
  const std::size_t n = x.rows(), p = x.cols();
  Matrix wide(n, p + 2);
  std::vector<FeatureBlock> blocks;
  std::vector<std::string> x_names;
  std::size_t out = 0;
  for (std::size_t j = 0; j < p; ++j) {
    if (j == 11) {
      const auto& q = kNormalQuartiles;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = x(i, j);
        wide(i, out) = v < q[0] ? 1.0 : 0.0;
        wide(i, out + 1) = (q[0] <= v && v < q[1]) ? 1.0 : 0.0;
        wide(i, out + 2) = (q[1] <= v && v < q[2]) ? 1.0 : 0.0;
      }
      blocks.push_back({{out, out + 1, out + 2}});
      for (int k = 1; k <= 3; ++k) x_names.push_back("X12d" + std::to_string(k));
      out += 3;
      continue;
    }
    auto src = x.col(j);
    auto dst = wide.col(out);
    std::copy(src.begin(), src.end(), dst.begin());
    blocks.push_back({{out}});
    x_names.push_back("X" + std::to_string(j + 1));
    ++out;
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back(j == 11 ? "X12grp" : "X" + std::to_string(j + 1));
  return Dataset(std::move(wide), std::move(y), std::move(blocks), std::move(names), std::move(x_names));
}

/// Everything one replication needs: the dataset fed to the screeners.
/// Draw order from the replication stream: coefficients, design, response.
inline Dataset simulate_dataset(const ModelSpec& spec, Rng& rng) {
  const CoeffDraw coeffs = draw_coefficients(spec, rng);
  Matrix x = sample_ar1_normal(spec.n, spec.p, spec.rho, rng);
  Matrix y = gen_response(spec, x, coeffs, rng);
  return build_dataset(spec.model, x, std::move(y));
}

/// Smallest prefix of `ranking` containing every block in `active`.
inline std::size_t min_model_size(const std::vector<std::size_t>& ranking, const std::vector<std::size_t>& active) {
  std::size_t size = 0;
  for (std::size_t a : active) {
    const auto it = std::find(ranking.begin(), ranking.end(), a);
    if (it == ranking.end())
      throw Error(ErrorCode::InvalidArgument, "active block " + std::to_string(a + 1) + " missing from ranking");
    size = std::max(size, static_cast<std::size_t>(it - ranking.begin()) + 1);
  }
  return size;
}

/// Empirical quantiles by linear interpolation between order statistics:
/// h = (N - 1) p, result = v[floor h] + (h - floor h)(v[floor h + 1] - v[floor h]).
inline std::vector<double> quantiles(std::vector<double> values, const std::vector<double>& probs) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantiles of an empty sample");
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double prob : probs) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
    const double h = static_cast<double>(values.size() - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    out.push_back(values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]));
  }
  return out;
}

inline const std::vector<double>& report_probs() {
  static const std::vector<double> probs{0.05, 0.25, 0.50, 0.75, 0.95};
  return probs;
}

struct ReplicationOutcome {
  std::vector<std::size_t> ranking;
  std::vector<std::size_t> true_active;
  std::size_t min_model_size = 0;
  std::vector<std::vector<bool>> selected_at;  // [active block][cutoff]
};

struct EvalReport {
  ModelSpec spec;
  Method method = Method::DcSis;
  std::size_t replications = 0;
  std::vector<std::size_t> cutoffs;
  std::vector<std::string> active_labels;
  std::vector<double> s_quantiles;           // at report_probs()
  std::vector<std::vector<double>> ps_table;  // [active block][cutoff]
  std::vector<double> pa_table;               // [cutoff]
  std::vector<std::size_t> min_model_sizes;   // per replication, rep order
};

inline std::vector<std::size_t> default_cutoffs(std::size_t n) {
  return {cutoff_d(n, 1), cutoff_d(n, 2), cutoff_d(n, 3)};
}

inline bool method_supports(Method method, ModelId model) {
  if (method == Method::DcSis) return true;
  return model != ModelId::M2 && model != ModelId::M3a && model != ModelId::M3b;
}

inline ReplicationOutcome evaluate_ranking(std::vector<std::size_t> ranking, std::vector<std::size_t> active,
                                           const std::vector<std::size_t>& cutoffs) {
  ReplicationOutcome out;
  out.min_model_size = min_model_size(ranking, active);
  std::vector<std::size_t> position(ranking.size());
  for (std::size_t r = 0; r < ranking.size(); ++r) position[ranking[r]] = r;
  for (std::size_t a : active) {
    std::vector<bool> flags;
    for (std::size_t d : cutoffs) flags.push_back(position[a] < d);
    out.selected_at.push_back(std::move(flags));
  }
  out.ranking = std::move(ranking);
  out.true_active = std::move(active);
  return out;
}

/// One replication: fresh data from child_seed(master, rep), ranked by `method`.
inline ReplicationOutcome run_replication(const ModelSpec& spec, Method method, std::size_t rep,
                                          const std::vector<std::size_t>& cutoffs) {
  Rng rng(child_seed(spec.seed, rep));
  const Dataset data = simulate_dataset(spec, rng);
  auto ranking = rank_by_utility(compute_utilities(data, method));
  return evaluate_ranking(std::move(ranking), true_active(spec.model), cutoffs);
}

/// Monte Carlo evaluation of one screener on one model. Replications run in
/// parallel; results are reduced in replication order, so the report does not
/// depend on `workers`.
inline EvalReport run_replications(const ModelSpec& spec, Method method, std::size_t reps,
                                   std::vector<std::size_t> cutoffs = {}, std::size_t workers = 1) {
  spec.validate();
  if (!method_supports(method, spec.model))
    throw Error(ErrorCode::IncompatibleMethod, std::string(display_name(method)) + " cannot screen model " +
                                                   to_string(spec.model) + " (grouped or multivariate)");
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "need at least one replication");
  if (cutoffs.empty()) cutoffs = default_cutoffs(spec.n);

  std::vector<ReplicationOutcome> outcomes(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    auto outcome = run_replication(spec, method, r, cutoffs);
    outcome.ranking.clear();
    outcome.ranking.shrink_to_fit();
    outcomes[r] = std::move(outcome);
  });

  EvalReport report;
  report.spec = spec;
  report.method = method;
  report.replications = reps;
  report.cutoffs = cutoffs;
  report.active_labels = active_labels(spec.model);
  const std::size_t n_active = true_active(spec.model).size();
  report.ps_table.assign(n_active, std::vector<double>(cutoffs.size(), 0.0));
  report.pa_table.assign(cutoffs.size(), 0.0);

  std::vector<double> sizes;
  for (const auto& o : outcomes) {
    report.min_model_sizes.push_back(o.min_model_size);
    sizes.push_back(static_cast<double>(o.min_model_size));
    for (std::size_t k = 0; k < cutoffs.size(); ++k) {
      bool all = true;
      for (std::size_t a = 0; a < n_active; ++a) {
        report.ps_table[a][k] += o.selected_at[a][k] ? 1.0 : 0.0;
        all = all && o.selected_at[a][k];
      }
      report.pa_table[k] += all ? 1.0 : 0.0;
    }
  }
  const double denom = static_cast<double>(reps);
  for (auto& row : report.ps_table)
    for (double& v : row) v /= denom;
  for (double& v : report.pa_table) v /= denom;
  report.s_quantiles = quantiles(std::move(sizes), report_probs());
  return report;
}

/// Named simulation configurations. "case1".."case4" follow the full-scale
/// grid (p, rho) = (2000, .5), (2000, .8), (5000, .5), (5000, .8) with 500
/// replications; the "-desk" variants use p = 500 and 100 replications.
struct Preset {
  std::string name;
  ModelSpec spec;
  std::size_t reps = 500;
};

inline std::vector<Preset> presets() {
  std::vector<Preset> out;
  constexpr std::array<std::pair<std::size_t, double>, 4> cases{{{2000, 0.5}, {2000, 0.8}, {5000, 0.5}, {5000, 0.8}}};
  for (auto model : {ModelId::M1a, ModelId::M1b, ModelId::M1c, ModelId::M1d, ModelId::M2, ModelId::M3a, ModelId::M3b}) {
    for (std::size_t k = 0; k < cases.size(); ++k) {
      const std::string base = std::string(to_string(model)) + "-case" + std::to_string(k + 1);
      ModelSpec spec;
      spec.model = model;
      spec.n = 200;
      spec.p = cases[k].first;
      spec.rho = cases[k].second;
      out.push_back({base, spec, 500});
      spec.p = 500;
      out.push_back({base + "-desk", spec, 100});
    }
  }
  return out;
}

inline std::optional<Preset> find_preset(std::string_view name) {
  for (auto& p : presets())
    if (p.name == name) return p;
  return std::nullopt;
}

/// Decay of max_k |w_hat_k - w_ref_k| with n, where w_ref is a large-sample
/// surrogate for the population utilities.
struct ConvergenceConfig {
  ModelSpec spec;                                     // model, p, rho, master seed (n unused)
  std::vector<std::size_t> grid{50, 100, 200, 400};  // sample sizes
  std::size_t seeds = 20;
  std::size_t reference_n = 20000;
  /// Sample size used for the coefficient draw; the coefficients are drawn
  /// once and held fixed so every n targets the same population.
  std::size_t coefficient_n = 200;
};

struct ConvergencePoint {
  std::size_t n = 0;
  std::vector<double> errors;  // one per seed
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct ConvergenceReport {
  ConvergenceConfig config;
  CoeffDraw coefficients;
  std::vector<double> reference_utilities;
  std::vector<ConvergencePoint> points;
};

inline ConvergenceReport run_convergence(const ConvergenceConfig& cfg, std::size_t workers = 1) {
  if (cfg.grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "convergence grid needs at least 2 sample sizes");
  if (cfg.seeds == 0) throw Error(ErrorCode::InvalidArgument, "convergence needs at least one seed");
  ModelSpec base = cfg.spec;
  base.n = cfg.coefficient_n;
  base.validate();
  for (std::size_t n : cfg.grid)
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "grid sample sizes must be >= 3");

  ConvergenceReport report;
  report.config = cfg;
  {
    Rng rng(child_seed(base.seed, 0, /*stream=*/1));
    report.coefficients = draw_coefficients(base, rng);
  }

  auto draw = [&](std::size_t n, Rng& rng) {
    ModelSpec spec = base;
    spec.n = n;
    Matrix x = sample_ar1_normal(n, spec.p, spec.rho, rng);
    Matrix y = gen_response(spec, x, report.coefficients, rng);
    return build_dataset(spec.model, x, std::move(y));
  };

  {
    Rng rng(child_seed(base.seed, 0, /*stream=*/2));
    const Dataset big = draw(cfg.reference_n, rng);
    report.reference_utilities = dcsis_utilities(big, workers);
  }

  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    ConvergencePoint point;
    point.n = cfg.grid[gi];
    point.errors.assign(cfg.seeds, 0.0);
    parallel_for(cfg.seeds, workers, [&](std::size_t s) {
      Rng rng(child_seed(base.seed, s, /*stream=*/3 + gi));
      const auto util = dcsis_utilities(draw(point.n, rng));
      double worst = 0.0;
      for (std::size_t k = 0; k < util.size(); ++k)
        worst = std::max(worst, std::abs(util[k] - report.reference_utilities[k]));
      point.errors[s] = worst;
    });
    const auto q = quantiles(point.errors, {0.25, 0.5, 0.75});
    point.q25 = q[0];
    point.median = q[1];
    point.q75 = q[2];
    report.points.push_back(std::move(point));
  }
  return report;
}

}  // namespace dcscreen
