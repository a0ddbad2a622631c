#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emoeeg {

enum class ErrorCode {
  MissingFile,
  MissingColumn,
  UnknownLabel,
  NonNumericCell,
  NonFiniteCell,
  DuplicateName,
  EmptyFile,
  RaggedRow,
  InvalidArgument,
  PathError,
  TooShort,
  DegenerateVariance,
  InfeasiblePerplexity,
  DimensionMismatch,
  NonFiniteLoss,
  SingleClass,
  EmptyEvaluation,
  InvalidConfig,
  SchemaMismatch,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this type. `code` is the
// machine-readable identity; row/column are filled in by the CSV loaders
// (row is 1-based and counts the header as row 1).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::string> column = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& row() const noexcept { return row_; }
  const std::optional<std::string>& column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::optional<std::string> column_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace emoeeg
