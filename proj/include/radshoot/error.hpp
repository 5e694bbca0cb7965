#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radshoot {

enum class ErrorCode {
  InvalidSpec,
  DomainExceeded,
  ContinuityGap,
  OrderingViolated,
  NoBeta,
  AmbiguousZero,
  StartRadiusTooLarge,
  StepSizeUnderflow,
  OutOfRange,
  Inconclusive,
  InvalidHeight,
  NotMonotone,
  FVanishes,
  LandscapeIncomplete,
  BracketBroken,
  NotFound,
  SearchExhausted,
  ReproductionFailed,
  PreconditionFailed,
  Config,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DomainExceeded: return "DomainExceeded";
    case ErrorCode::ContinuityGap: return "ContinuityGap";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::NoBeta: return "NoBeta";
    case ErrorCode::AmbiguousZero: return "AmbiguousZero";
    case ErrorCode::StartRadiusTooLarge: return "StartRadiusTooLarge";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::InvalidHeight: return "InvalidHeight";
    case ErrorCode::NotMonotone: return "NotMonotone";
    case ErrorCode::FVanishes: return "FVanishes";
    case ErrorCode::LandscapeIncomplete: return "LandscapeIncomplete";
    case ErrorCode::BracketBroken: return "BracketBroken";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::ReproductionFailed: return "ReproductionFailed";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type; `code()` lets
/// callers (and the CLI exit-code mapping) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace radshoot
