#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pitdep {

enum class ErrorCode {
  Domain,
  NonConvergence,
  EmptySample,
  BoundaryValue,
  InvalidPartition,
  DegenerateP,
  NonFiniteInput,
  GammaOutOfRange,
  IndexMismatch,
  TieError,
  OrderingViolation,
  Config,
  Parse,
  Replicate,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::BoundaryValue: return "BoundaryValue";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::DegenerateP: return "DegenerateP";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::TieError: return "TieError";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Replicate: return "ReplicateError";
  }
  return "Error";
}

// All library failures are reported through this type. what() is
// "<CodeName>: <detail>" so callers printing the message get the code too.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Shared remedy text for exact 0/1 PIT values.
inline constexpr std::string_view kBoundaryRemedy =
    "PIT values of exactly 0 or 1 cannot be tested with order- or "
    "inverse-CDF-based pointwise tests; compute PITs from parametric "
    "predictive CDFs (randomizing within the CDF jump for discrete models)";

}  // namespace pitdep
