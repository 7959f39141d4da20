#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cohortlens {

enum class ErrorCode {
  MalformedCsv,
  UnknownSymptom,
  RatingOutOfRange,
  UnknownTimepointLabel,
  DuplicateCell,
  DuplicatePatient,
  AlreadyImputed,
  ImputedInputRejected,
  UnimputedSeries,
  EmptyTransactionSet,
  ZeroMarginalSupport,
  InvalidArgument,
  EmptySymptomSubset,
  NoEligiblePatients,
  TooFewPatients,
  DeltaOutOfRange,
  NonAdjacentTimepoints,
  TooFewReporters,
  NoReporters,
  EmptyRuleList,
  UnknownPatient,
  UnknownDataset,
  UnknownPhase,
  PayloadTooLarge,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every engine failure. The code drives CLI exit codes
/// and HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One input problem found during ingestion. Row numbers are 1-based and count
/// the header line, so they match what an editor shows.
struct Violation {
  ErrorCode code;
  std::string file;
  std::size_t row = 0;
  std::string column;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace cohortlens
