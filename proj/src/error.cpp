#include "cohortlens/error.hpp"

namespace cohortlens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::UnknownSymptom: return "UnknownSymptom";
    case ErrorCode::RatingOutOfRange: return "RatingOutOfRange";
    case ErrorCode::UnknownTimepointLabel: return "UnknownTimepointLabel";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::DuplicatePatient: return "DuplicatePatient";
    case ErrorCode::AlreadyImputed: return "AlreadyImputed";
    case ErrorCode::ImputedInputRejected: return "ImputedInputRejected";
    case ErrorCode::UnimputedSeries: return "UnimputedSeries";
    case ErrorCode::EmptyTransactionSet: return "EmptyTransactionSet";
    case ErrorCode::ZeroMarginalSupport: return "ZeroMarginalSupport";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySymptomSubset: return "EmptySymptomSubset";
    case ErrorCode::NoEligiblePatients: return "NoEligiblePatients";
    case ErrorCode::TooFewPatients: return "TooFewPatients";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::NonAdjacentTimepoints: return "NonAdjacentTimepoints";
    case ErrorCode::TooFewReporters: return "TooFewReporters";
    case ErrorCode::NoReporters: return "NoReporters";
    case ErrorCode::EmptyRuleList: return "EmptyRuleList";
    case ErrorCode::UnknownPatient: return "UnknownPatient";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::UnknownPhase: return "UnknownPhase";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
  if (violations.empty()) return "validation failed";
  const auto& v = violations.front();
  std::string msg = std::string(to_string(v.code)) + " at " + v.file + ":" +
                    std::to_string(v.row);
  if (!v.message.empty()) msg += ": " + v.message;
  if (violations.size() > 1) {
    msg += " (+" + std::to_string(violations.size() - 1) + " more)";
  }
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::MalformedCsv : violations.front().code,
            summarize(violations)),
      violations_(std::move(violations)) {}

}  // namespace cohortlens
