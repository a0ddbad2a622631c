#include "emoeeg/errors.hpp"

namespace emoeeg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "missing_file";
    case ErrorCode::MissingColumn: return "missing_column";
    case ErrorCode::UnknownLabel: return "unknown_label";
    case ErrorCode::NonNumericCell: return "non_numeric_cell";
    case ErrorCode::NonFiniteCell: return "non_finite_cell";
    case ErrorCode::DuplicateName: return "duplicate_name";
    case ErrorCode::EmptyFile: return "empty_file";
    case ErrorCode::RaggedRow: return "ragged_row";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::PathError: return "path_error";
    case ErrorCode::TooShort: return "too_short";
    case ErrorCode::DegenerateVariance: return "degenerate_variance";
    case ErrorCode::InfeasiblePerplexity: return "infeasible_perplexity";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::NonFiniteLoss: return "non_finite_loss";
    case ErrorCode::SingleClass: return "single_class";
    case ErrorCode::EmptyEvaluation: return "empty_evaluation";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::SchemaMismatch: return "schema_mismatch";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> row, std::optional<std::string> column)
    : std::runtime_error(message), code_(code), row_(row), column_(std::move(column)) {}

}  // namespace emoeeg
