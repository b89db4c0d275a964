#include "fatou/core.h"

namespace fatou {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Degenerate: return "Degenerate";
    case Errc::Pole: return "Pole";
    case Errc::RootFinding: return "RootFinding";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::CriticalProximity: return "CriticalProximity";
    case Errc::PunctureHit: return "PunctureHit";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::AllCensored: return "AllCensored";
    case Errc::EllipticRotation: return "EllipticRotation";
    case Errc::Inconclusive: return "Inconclusive";
    case Errc::WrongNormalization: return "WrongNormalization";
    case Errc::CriticalOnCircle: return "CriticalOnCircle";
    case Errc::CriticalFiber: return "CriticalFiber";
    case Errc::BranchUndefined: return "BranchUndefined";
    case Errc::OrbitEscaped: return "OrbitEscaped";
    case Errc::EmptyShell: return "EmptyShell";
    case Errc::CriticalFiberHit: return "CriticalFiberHit";
    case Errc::VerificationFailed: return "VerificationFailed";
    case Errc::ScheduleNeverStarts: return "ScheduleNeverStarts";
    case Errc::BranchObstructed: return "BranchObstructed";
    case Errc::InsufficientDepth: return "InsufficientDepth";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::ReturnTimeBlowup: return "ReturnTimeBlowup";
    case Errc::SchemaError: return "SchemaError";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what, long index)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), index_(index), detail_(what) {}

}  // namespace fatou
