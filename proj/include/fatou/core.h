#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace fatou {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Errc {
  InvalidArgument,
  Degenerate,
  Pole,
  RootFinding,
  StepTooLarge,
  CriticalProximity,
  PunctureHit,
  HypothesisViolated,
  ResolutionTooCoarse,
  BackendUnavailable,
  NonPositiveValue,
  AllCensored,
  EllipticRotation,
  Inconclusive,
  WrongNormalization,
  CriticalOnCircle,
  CriticalFiber,
  BranchUndefined,
  OrbitEscaped,
  EmptyShell,
  CriticalFiberHit,
  VerificationFailed,
  ScheduleNeverStarts,
  BranchObstructed,
  InsufficientDepth,
  BudgetExhausted,
  ReturnTimeBlowup,
  SchemaError,
  Io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, long index = -1);
  Errc code() const noexcept { return code_; }
  // Level, trial or step index attached to the failure; -1 when not applicable.
  long index() const noexcept { return index_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  long index_;
  std::string detail_;
};

// A point of the Riemann sphere. Infinity is a tag, never an arithmetic value.
struct ExtendedPoint {
  cplx z{0.0, 0.0};
  bool infinite = false;

  ExtendedPoint() = default;
  ExtendedPoint(cplx w) : z(w) {}  // NOLINT(google-explicit-constructor)
  static ExtendedPoint infinity() {
    ExtendedPoint p;
    p.infinite = true;
    return p;
  }
  bool is_finite() const { return !infinite; }
  bool operator==(const ExtendedPoint& o) const {
    return infinite == o.infinite && (infinite || z == o.z);
  }
};

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace fatou
