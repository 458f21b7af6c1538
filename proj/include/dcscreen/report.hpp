#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dcscreen/dataset.hpp"
#include "dcscreen/error.hpp"
#include "dcscreen/screen.hpp"
#include "dcscreen/simulate.hpp"

namespace dcscreen {

using Json = nlohmann::ordered_json;

inline Json to_json(const SelectionRule& rule) {
  if (const auto* top = std::get_if<TopD>(&rule)) return Json{{"type", "top-d"}, {"d", top->d}};
  const auto& th = std::get<Threshold>(rule);
  return Json{{"type", "threshold"}, {"c", th.c}, {"kappa", th.kappa}};
}

inline Json to_json(const ModelSpec& spec) {
  return Json{{"model", to_string(spec.model)}, {"n", spec.n},     {"p", spec.p},
              {"rho", spec.rho},                {"c", spec.c},     {"seed", spec.seed}};
}

/// Report payload. Block ids and cutoffs are 1-based, as printed in tables.
inline Json to_json(const EvalReport& r) {
  Json ps = Json::object();
  for (std::size_t a = 0; a < r.active_labels.size(); ++a) ps[r.active_labels[a]] = r.ps_table[a];
  Json sq = Json::object();
  const auto& probs = report_probs();
  for (std::size_t k = 0; k < probs.size(); ++k) {
    char label[16];
    std::snprintf(label, sizeof label, "%g%%", probs[k] * 100.0);
    sq[label] = r.s_quantiles[k];
  }
  return Json{{"method", display_name(r.method)},
              {"spec", to_json(r.spec)},
              {"replications", r.replications},
              {"cutoffs", r.cutoffs},
              {"min_model_size_quantiles", sq},
              {"ps", ps},
              {"pa", r.pa_table},
              {"min_model_sizes", r.min_model_sizes}};
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// One row per report: method, model, then the S quantiles.
inline void write_size_table(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "method,model,n,p,rho,reps,q05,q25,q50,q75,q95\n";
  for (const auto& r : reports) {
    out << display_name(r.method) << ',' << to_string(r.spec.model) << ',' << r.spec.n << ',' << r.spec.p << ','
        << detail::format_double(r.spec.rho) << ',' << r.replications;
    for (double q : r.s_quantiles) out << ',' << format_fixed(q, 1);
    out << '\n';
  }
}

/// One row per (report, cutoff): per-active Ps columns then Pa.
inline void write_selection_table(std::ostream& out, const std::vector<EvalReport>& reports) {
  const auto& labels = reports.empty() ? std::vector<std::string>{} : reports.front().active_labels;
  out << "method,model,size,d";
  for (const auto& l : labels) out << ",Ps_" << l;
  out << ",Pa\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.cutoffs.size(); ++k) {
      out << display_name(r.method) << ',' << to_string(r.spec.model) << ",d" << (k + 1) << ',' << r.cutoffs[k];
      for (const auto& row : r.ps_table) out << ',' << format_fixed(row[k], 2);
      out << ',' << format_fixed(r.pa_table[k], 2) << '\n';
    }
  }
}

inline Json to_json(const ConvergenceReport& r) {
  Json points = Json::array();
  for (const auto& pt : r.points)
    points.push_back(Json{{"n", pt.n}, {"median", pt.median}, {"q25", pt.q25}, {"q75", pt.q75}, {"errors", pt.errors}});
  return Json{{"spec", to_json(r.config.spec)},
              {"grid", r.config.grid},
              {"seeds", r.config.seeds},
              {"reference_n", r.config.reference_n},
              {"coefficient_n", r.config.coefficient_n},
              {"beta", r.coefficients.beta},
              {"reference_utilities", r.reference_utilities},
              {"points", points}};
}

inline void write_convergence_table(std::ostream& out, const ConvergenceReport& r) {
  out << "n,median_max_error,q25,q75\n";
  for (const auto& pt : r.points)
    out << pt.n << ',' << detail::format_double(pt.median) << ',' << detail::format_double(pt.q25) << ','
        << detail::format_double(pt.q75) << '\n';
}

/// utilities.csv: block_id (1-based), name, utility, rank (1 = best).
inline void write_utilities(std::ostream& out, const Dataset& data, const ScreeningResult& result) {
  std::vector<std::size_t> rank(result.ranking.size());
  for (std::size_t r = 0; r < result.ranking.size(); ++r) rank[result.ranking[r]] = r + 1;
  out << "block_id,name,utility,rank\n";
  for (std::size_t g = 0; g < result.utilities.size(); ++g)
    out << (g + 1) << ',' << data.block_names()[g] << ',' << detail::format_double(result.utilities[g]) << ','
        << rank[g] << '\n';
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace dcscreen
