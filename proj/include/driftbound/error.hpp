#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace driftbound {

enum class ErrorCode {
  MissingField,
  BadShape,
  BadValue,
  NotSymmetric,
  NonPositiveDefinite,
  UnstableKappa,
  BadTheta,
  BadArrivalTimes,
  NotOneDimensional,
  BeyondExplosion,
  ExplodedRegion,
  NotOnGrid,
  MissingExpertConfig,
  LostPositivity,
  SingularGamma,
  UnsupportedRegime,
  EigenvalueConditionViolated,
  ExplodedRiccati,
  NotPSD,
  UnknownAxis,
  NoSignChange,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Violation {
  ErrorCode code;
  std::string field;
  std::string message;
};

/// Raised by parameter validation with every violation found, not just the
/// first one. `code()` is the code of the first violation.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept {
    return violations_;
  }
  bool has(ErrorCode code) const;

 private:
  std::vector<Violation> violations_;
};

}  // namespace driftbound
