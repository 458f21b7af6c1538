#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcscreen/baselines.hpp"
#include "dcscreen/dataset.hpp"
#include "dcscreen/screen.hpp"

namespace dcscreen {

enum class Method { DcSis, Sis, Sirs };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::DcSis: return "dcsis";
    case Method::Sis: return "sis";
    case Method::Sirs: return "sirs";
  }
  return "unknown";
}

inline const char* display_name(Method m) {
  switch (m) {
    case Method::DcSis: return "DC-SIS";
    case Method::Sis: return "SIS";
    case Method::Sirs: return "SIRS";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "dcsis" || s == "dc-sis") return Method::DcSis;
  if (s == "sis") return Method::Sis;
  if (s == "sirs") return Method::Sirs;
  return std::nullopt;
}

/// Marginal utilities of every block under the chosen screener.
inline std::vector<double> compute_utilities(const Dataset& data, Method method, std::size_t workers = 1) {
  switch (method) {
    case Method::DcSis: return dcsis_utilities(data, workers);
    case Method::Sis: return sis_utilities(data, workers);
    case Method::Sirs: return sirs_utilities(data, workers);
  }
  return {};
}

/// Runs the screener and applies the rule. Baselines reject multivariate
/// responses and grouped blocks before any computation.
inline ScreeningResult screen_dataset(const Dataset& data, Method method, const SelectionRule& rule,
                                      std::size_t workers = 1) {
  if (method == Method::DcSis) return dcsis_screen(data, rule, workers);
  return rank_and_select(compute_utilities(data, method, workers), rule, data.n());
}

}  // namespace dcscreen
