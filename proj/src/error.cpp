#include "driftbound/error.hpp"

#include <algorithm>

namespace driftbound {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::UnstableKappa: return "UnstableKappa";
    case ErrorCode::BadTheta: return "BadTheta";
    case ErrorCode::BadArrivalTimes: return "BadArrivalTimes";
    case ErrorCode::NotOneDimensional: return "NotOneDimensional";
    case ErrorCode::BeyondExplosion: return "BeyondExplosion";
    case ErrorCode::ExplodedRegion: return "ExplodedRegion";
    case ErrorCode::NotOnGrid: return "NotOnGrid";
    case ErrorCode::MissingExpertConfig: return "MissingExpertConfig";
    case ErrorCode::LostPositivity: return "LostPositivity";
    case ErrorCode::SingularGamma: return "SingularGamma";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::EigenvalueConditionViolated:
      return "EigenvalueConditionViolated";
    case ErrorCode::ExplodedRiccati: return "ExplodedRiccati";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::UnknownAxis: return "UnknownAxis";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string join(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(v.code)) + "(" + v.field + ")";
    if (!v.message.empty()) out += " " + v.message;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::BadValue : violations.front().code,
            join(violations)),
      violations_(std::move(violations)) {}

bool ValidationError::has(ErrorCode code) const {
  return std::any_of(violations_.begin(), violations_.end(),
                     [code](const Violation& v) { return v.code == code; });
}

}  // namespace driftbound
