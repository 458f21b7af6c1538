#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcscreen/error.hpp"
#include "dcscreen/matrix.hpp"

namespace dcscreen {

/// A set of predictor columns screened together as one multivariate unit.
/// Columns are 0-based and strictly increasing.
struct FeatureBlock {
  std::vector<std::size_t> columns;

  std::size_t width() const noexcept { return columns.size(); }
  friend bool operator==(const FeatureBlock&, const FeatureBlock&) = default;
};

inline std::vector<FeatureBlock> singleton_blocks(std::size_t p) {
  std::vector<FeatureBlock> blocks(p);
  for (std::size_t k = 0; k < p; ++k) blocks[k].columns = {k};
  return blocks;
}

/// Predictors x (n x p), responses y (n x q) and a partition of the predictor
/// columns into G blocks. Immutable once constructed; the constructor enforces
/// every invariant, so any Dataset in hand is valid.
class Dataset {
 public:
  Dataset(Matrix x, Matrix y, std::vector<FeatureBlock> blocks = {},
          std::vector<std::string> block_names = {}, std::vector<std::string> x_names = {},
          std::vector<std::string> y_names = {})
      : x_(std::move(x)),
        y_(std::move(y)),
        blocks_(std::move(blocks)),
        block_names_(std::move(block_names)),
        x_names_(std::move(x_names)),
        y_names_(std::move(y_names)) {
    if (x_.cols() == 0) throw Error(ErrorCode::EmptyPredictors, "dataset has no predictor columns");
    if (y_.cols() == 0) throw Error(ErrorCode::InvalidArgument, "dataset has no response columns");
    if (x_.rows() != y_.rows())
      throw Error(ErrorCode::DimensionMismatch,
                  "x has " + std::to_string(x_.rows()) + " rows but y has " + std::to_string(y_.rows()));
    if (x_.rows() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 rows, got " + std::to_string(x_.rows()));
    for (double v : x_.data())
      if (!std::isfinite(v)) throw Error(ErrorCode::NonNumericCell, "non-finite predictor value");
    for (double v : y_.data())
      if (!std::isfinite(v)) throw Error(ErrorCode::NonNumericCell, "non-finite response value");

    if (blocks_.empty()) blocks_ = singleton_blocks(x_.cols());
    validate_partition();

    if (x_names_.empty())
      for (std::size_t c = 0; c < x_.cols(); ++c) x_names_.push_back("X" + std::to_string(c + 1));
    if (y_names_.empty())
      for (std::size_t c = 0; c < y_.cols(); ++c) y_names_.push_back("Y" + std::to_string(c + 1));
    if (x_names_.size() != x_.cols() || y_names_.size() != y_.cols())
      throw Error(ErrorCode::InvalidArgument, "column name count does not match matrix width");

    if (block_names_.empty()) {
      for (const auto& b : blocks_) {
        std::string name;
        for (std::size_t c : b.columns) {
          if (!name.empty()) name += '+';
          name += x_names_[c];
        }
        block_names_.push_back(std::move(name));
      }
    }
    if (block_names_.size() != blocks_.size())
      throw Error(ErrorCode::InvalidArgument, "block name count does not match block count");
  }

  std::size_t n() const noexcept { return x_.rows(); }
  std::size_t p() const noexcept { return x_.cols(); }
  std::size_t q() const noexcept { return y_.cols(); }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }

  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  const std::vector<FeatureBlock>& blocks() const noexcept { return blocks_; }
  const FeatureBlock& block(std::size_t g) const { return blocks_.at(g); }
  const std::vector<std::string>& block_names() const noexcept { return block_names_; }
  const std::vector<std::string>& x_names() const noexcept { return x_names_; }
  const std::vector<std::string>& y_names() const noexcept { return y_names_; }

  bool all_singletons() const noexcept {
    for (const auto& b : blocks_)
      if (b.width() != 1) return false;
    return true;
  }

  /// Same values, different partition.
  Dataset regrouped(std::vector<FeatureBlock> blocks, std::vector<std::string> block_names = {}) const {
    return Dataset(x_, y_, std::move(blocks), std::move(block_names), x_names_, y_names_);
  }

 private:
  void validate_partition() const {
    std::vector<int> seen(x_.cols(), 0);
    for (const auto& b : blocks_) {
      if (b.columns.empty()) throw Error(ErrorCode::BadGroupSpec, "empty feature block");
      for (std::size_t i = 0; i < b.columns.size(); ++i) {
        const std::size_t c = b.columns[i];
        if (c >= x_.cols())
          throw Error(ErrorCode::BadGroupSpec, "block references column " + std::to_string(c + 1) +
                                                   " beyond p=" + std::to_string(x_.cols()));
        if (i > 0 && b.columns[i - 1] >= c)
          throw Error(ErrorCode::BadGroupSpec, "block columns must be strictly increasing");
        if (seen[c]++) throw Error(ErrorCode::BadGroupSpec, "column " + std::to_string(c + 1) + " in two blocks");
      }
    }
    for (std::size_t c = 0; c < seen.size(); ++c)
      if (!seen[c]) throw Error(ErrorCode::BadGroupSpec, "column " + std::to_string(c + 1) + " not in any block");
  }

  Matrix x_;
  Matrix y_;
  std::vector<FeatureBlock> blocks_;
  std::vector<std::string> block_names_;
  std::vector<std::string> x_names_;
  std::vector<std::string> y_names_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses a grouping such as "1-3;4;5-6" over p predictor columns (1-based,
/// inclusive ranges). The result must partition 1..p exactly.
inline std::vector<FeatureBlock> parse_group_spec(std::string_view spec, std::size_t p) {
  std::vector<FeatureBlock> blocks;
  for (auto part : detail::split(spec, ';')) {
    part = detail::trim(part);
    if (part.empty()) throw Error(ErrorCode::BadGroupSpec, "empty group in '" + std::string(spec) + "'");
    FeatureBlock b;
    const auto dash = part.find('-');
    const auto lo = detail::parse_index(part.substr(0, dash));
    const auto hi = dash == std::string_view::npos ? lo : detail::parse_index(part.substr(dash + 1));
    if (!lo || !hi || *lo == 0 || *hi < *lo)
      throw Error(ErrorCode::BadGroupSpec, "bad group '" + std::string(part) + "'");
    if (*hi > p)
      throw Error(ErrorCode::BadGroupSpec,
                  "group '" + std::string(part) + "' exceeds predictor count " + std::to_string(p));
    for (std::size_t c = *lo; c <= *hi; ++c) b.columns.push_back(c - 1);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

/// Resolves a response-column spec against a CSV header. Accepted forms:
/// "last", "last:K" (final K columns), or a comma-separated list of 1-based
/// indices and/or header names. Returns 0-based column indices in spec order.
inline std::vector<std::size_t> resolve_response_cols(std::string_view spec, const std::vector<std::string>& header) {
  std::vector<std::size_t> cols;
  spec = detail::trim(spec);
  if (spec.empty()) throw Error(ErrorCode::BadColumnSpec, "empty response column spec");
  if (spec.starts_with("last")) {
    std::size_t k = 1;
    if (spec.size() > 4) {
      const auto count = spec[4] == ':' ? detail::parse_index(spec.substr(5)) : std::nullopt;
      if (!count || *count == 0) throw Error(ErrorCode::BadColumnSpec, "bad spec '" + std::string(spec) + "'");
      k = *count;
    }
    if (k > header.size()) throw Error(ErrorCode::BadColumnSpec, "more response columns than CSV columns");
    for (std::size_t c = header.size() - k; c < header.size(); ++c) cols.push_back(c);
    return cols;
  }
  for (auto item : detail::split(spec, ',')) {
    item = detail::trim(item);
    std::optional<std::size_t> col;
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == item) col = c;
    if (!col) {
      const auto idx = detail::parse_index(item);
      if (!idx || *idx == 0 || *idx > header.size())
        throw Error(ErrorCode::BadColumnSpec, "unknown response column '" + std::string(item) + "'");
      col = *idx - 1;
    }
    if (std::find(cols.begin(), cols.end(), *col) != cols.end())
      throw Error(ErrorCode::BadColumnSpec, "response column listed twice: '" + std::string(item) + "'");
    cols.push_back(*col);
  }
  return cols;
}

/// Reads a comma-separated table with one header row. Any malformed row is a
/// whole-file error.
inline Dataset read_csv(std::istream& in, std::string_view response_cols = "last",
                        std::optional<std::string_view> group_spec = std::nullopt) {
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    for (auto h : detail::split(line, ',')) header.push_back(detail::unquote(h));
  }
  if (header.empty()) throw Error(ErrorCode::EmptyPredictors, "CSV has no header row");

  const auto resp = resolve_response_cols(response_cols, header);
  std::vector<bool> is_resp(header.size(), false);
  for (std::size_t c : resp) is_resp[c] = true;
  std::vector<std::size_t> pred;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!is_resp[c]) pred.push_back(c);
  if (pred.empty()) throw Error(ErrorCode::EmptyPredictors, "no predictor columns remain after removing responses");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size())
      throw Error(ErrorCode::RaggedRow, "row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                            " cells, header has " + std::to_string(header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v) throw NonNumericCell(line_no, c + 1, std::string(detail::trim(cells[c])));
      row[c] = *v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 data rows, got " + std::to_string(rows.size()));

  Matrix x(rows.size(), pred.size());
  Matrix y(rows.size(), resp.size());
  std::vector<std::string> x_names, y_names;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    x_names.push_back(header[pred[k]]);
    for (std::size_t i = 0; i < rows.size(); ++i) x(i, k) = rows[i][pred[k]];
  }
  for (std::size_t k = 0; k < resp.size(); ++k) {
    y_names.push_back(header[resp[k]]);
    for (std::size_t i = 0; i < rows.size(); ++i) y(i, k) = rows[i][resp[k]];
  }

  std::vector<FeatureBlock> blocks;
  if (group_spec && !detail::trim(*group_spec).empty()) blocks = parse_group_spec(*group_spec, pred.size());
  return Dataset(std::move(x), std::move(y), std::move(blocks), {}, std::move(x_names), std::move(y_names));
}

inline Dataset load_csv(const std::string& path, std::string_view response_cols = "last",
                        std::optional<std::string_view> group_spec = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
  return read_csv(in, response_cols, group_spec);
}

/// Writes predictors then responses, shortest round-trip decimal form.
/// Reading back with response spec "last:q" reproduces the values exactly.
inline void write_csv(const Dataset& d, std::ostream& out) {
  bool first = true;
  for (const auto& name : d.x_names()) {
    out << (first ? "" : ",") << name;
    first = false;
  }
  for (const auto& name : d.y_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t c = 0; c < d.p(); ++c) out << (c ? "," : "") << detail::format_double(d.x()(i, c));
    for (std::size_t c = 0; c < d.q(); ++c) out << ',' << detail::format_double(d.y()(i, c));
    out << '\n';
  }
}

inline void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  write_csv(d, out);
}

struct Standardized {
  Dataset data;
  std::vector<std::size_t> constant_columns;  // 0-based; centered to zero, not scaled
};

/// Centers each predictor column and scales it to unit sample standard
/// deviation (n - 1 denominator). Responses are untouched.
inline Standardized standardize_columns(const Dataset& d) {
  Matrix x = d.x();
  std::vector<std::size_t> flagged;
  const double n = static_cast<double>(d.n());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    auto col = x.col(c);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
    double ss = 0.0;
    for (double& v : col) {
      v -= mean;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
      std::fill(col.begin(), col.end(), 0.0);
      flagged.push_back(c);
      continue;
    }
    for (double& v : col) v /= sd;
  }
  return {Dataset(std::move(x), d.y(), d.blocks(), d.block_names(), d.x_names(), d.y_names()), std::move(flagged)};
}

}  // namespace dcscreen
