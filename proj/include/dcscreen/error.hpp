#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcscreen {

enum class ErrorCode {
  MissingFile,
  RaggedRow,
  NonNumericCell,
  EmptyPredictors,
  TooFewSamples,
  BadColumnSpec,
  BadGroupSpec,
  DimensionMismatch,
  InvalidArgument,
  UnsupportedResponse,
  UnsupportedGrouping,
  IncompatibleMethod,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::EmptyPredictors: return "EmptyPredictors";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::BadColumnSpec: return "BadColumnSpec";
    case ErrorCode::BadGroupSpec: return "BadGroupSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedResponse: return "UnsupportedResponse";
    case ErrorCode::UnsupportedGrouping: return "UnsupportedGrouping";
    case ErrorCode::IncompatibleMethod: return "IncompatibleMethod";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `code()` identifies the contract that
/// was violated; the message carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by CSV ingestion for cells that are not finite decimal numbers.
/// Row and column are 1-based and count the header as row 1.
class NonNumericCell : public Error {
 public:
  NonNumericCell(std::size_t row, std::size_t col, const std::string& cell)
      : Error(ErrorCode::NonNumericCell,
              "row " + std::to_string(row) + ", column " + std::to_string(col) + ": '" + cell + "'"),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace dcscreen
