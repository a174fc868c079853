#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

// Error categories double as process exit codes for the CLI:
// 0 ok, 2 configuration problem, 3 geometric domain violation
// (null vector, degenerate metric, invalid frame, ...), 4 numerical failure.
enum class ErrorCategory : int { Config = 2, Domain = 3, Numerical = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), cat_(cat) {}
  ErrorCategory category() const noexcept { return cat_; }
  int exit_code() const noexcept { return static_cast<int>(cat_); }

 private:
  ErrorCategory cat_;
};

#define FINSLER_ERROR_CLASS(Name, Cat)                    \
  class Name : public Error {                             \
   public:                                                \
    explicit Name(const std::string& msg)                 \
        : Error(ErrorCategory::Cat, #Name ": " + msg) {}  \
  }

// model construction / configuration
FINSLER_ERROR_CLASS(UnknownKind, Config);
FINSLER_ERROR_CLASS(DegreeOutOfRange, Config);
FINSLER_ERROR_CLASS(NonSymmetricMetricInput, Config);
FINSLER_ERROR_CLASS(OrderUnsupported, Config);
FINSLER_ERROR_CLASS(ConfigError, Config);
FINSLER_ERROR_CLASS(IoError, Config);

// geometric domain
FINSLER_ERROR_CLASS(EvaluationDomainError, Domain);
FINSLER_ERROR_CLASS(NullVectorError, Domain);
FINSLER_ERROR_CLASS(DegenerateHessian, Domain);
FINSLER_ERROR_CLASS(NoConeFound, Domain);
FINSLER_ERROR_CLASS(NullCrossing, Domain);
FINSLER_ERROR_CLASS(NotObserverPoint, Domain);
FINSLER_ERROR_CLASS(FrameNotOrthonormal, Domain);
FINSLER_ERROR_CLASS(SeedDegenerate, Domain);
FINSLER_ERROR_CLASS(TrajectoryLeftObserverSpace, Domain);
FINSLER_ERROR_CLASS(InvalidAlgebraElement, Domain);

// numerics
FINSLER_ERROR_CLASS(StepUnderflow, Numerical);
FINSLER_ERROR_CLASS(OracleInconsistent, Numerical);
FINSLER_ERROR_CLASS(StepFailure, Numerical);
FINSLER_ERROR_CLASS(ShootingDiverged, Numerical);
FINSLER_ERROR_CLASS(InsufficientSamples, Numerical);
FINSLER_ERROR_CLASS(DegeneracyEncountered, Numerical);

#undef FINSLER_ERROR_CLASS

}  // namespace finsler
