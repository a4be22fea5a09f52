#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vscc {

enum class ErrorCode {
  // data validation
  NonFiniteEntry,
  DuplicateName,
  TooFewRows,
  EmptyMatrix,
  ConstantColumn,
  EmptyGroup,
  DimensionMismatch,
  LengthMismatch,
  // mixture fitting
  DegenerateFit,
  TooFewObservations,
  AllFitsFailed,
  EmptyKnownGroup,
  // pipelines
  InitialSolutionHasOneGroup,
  AllCandidatesExcluded,
  InvalidSpec,
  InvalidConfig,
  // ingestion
  ParseError,
  NonNumericColumn,
  UnknownColumn,
  IoError,
};

// Coarse failure categories, used by the CLI to pick exit codes.
enum class ErrorCategory { Config, Data, Pipeline };

inline ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Config;
    case ErrorCode::DegenerateFit:
    case ErrorCode::AllFitsFailed:
    case ErrorCode::InitialSolutionHasOneGroup:
    case ErrorCode::AllCandidatesExcluded:
      return ErrorCategory::Pipeline;
    default:
      return ErrorCategory::Data;
  }
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::AllFitsFailed: return "AllFitsFailed";
    case ErrorCode::EmptyKnownGroup: return "EmptyKnownGroup";
    case ErrorCode::InitialSolutionHasOneGroup: return "InitialSolutionHasOneGroup";
    case ErrorCode::AllCandidatesExcluded: return "AllCandidatesExcluded";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonNumericColumn: return "NonNumericColumn";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return error_category(code_); }

 private:
  ErrorCode code_;
};

// One concrete violation found during validation; row/col are 1-based and
// -1 when not applicable.
struct Issue {
  ErrorCode code;
  long row = -1;
  long col = -1;
  std::string detail;
};

// Validation failure carrying every violation found, not just the first.
class ValidationError : public Error {
 public:
  ValidationError(std::vector<Issue> issues, const std::string& summary)
      : Error(issues.empty() ? ErrorCode::InvalidSpec : issues.front().code,
              summary),
        issues_(std::move(issues)) {}

  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

}  // namespace vscc
