#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftbound/filter.hpp"
#include "driftbound/linalg.hpp"
#include "driftbound/model.hpp"

namespace driftbound {

// The conditions checked here are sufficient only. A parameter set that fails
// them is reported as NotGuaranteed, never as ill-posed.
enum class Status { WellPosed, NotGuaranteed };

enum class Reason {
  ThetaNonpositive,
  DeltaNonnegative,
  HorizonBelowExplosion,
  RiccatiBounded,
  RiccatiExploded,
  CovarianceConditionFailed,
};

std::string_view to_string(Status status);
std::string_view to_string(Reason reason);
Status parse_status(std::string_view name);
Reason parse_reason(std::string_view name);

/// λ_max(A(t)Q_t) must stay below 1/2 − kCovarianceGuard.
inline constexpr double kCovarianceGuard = 1e-9;

struct VerdictDetails {
  std::optional<double> delta_psi;
  std::optional<double> explosion_time;
  std::optional<double> max_lambda;
  std::optional<double> first_violation_time;
};

struct Verdict {
  Status status = Status::WellPosed;
  Reason reason = Reason::ThetaNonpositive;
  Regime regime = Regime::F;
  VerdictDetails details;
};

/// Full-information verdict. θ ≤ 0 is always well posed; d = 1 is decided
/// from Δ_ψ and T^E; d > 1 from the explosion record of solve_abc.
/// `steps` = 0 selects default_steps(T).
Verdict check_full(const ModelParams& params, std::size_t steps = 0);

/// Partial-information verdict for R, J, Z (F delegates to check_full):
/// the full-information verdict plus λ_max(A(t)Q_t) < 1/2 at every grid node,
/// including both limits at expert arrivals.
Verdict check_partial(const ModelParams& params, Regime regime,
                      std::size_t steps = 0);

/// λ_max(AQ) for PSD A, Q, computed as λ_max(SQS) with S = A^{1/2}.
double lambda_max_product(const Matrix& A, const Matrix& Q);

struct Axis {
  std::string name;  // theta | T | sigma_R | sigma_mu | kappa | q0
  std::vector<double> values;
};

/// name:lo:hi:count with inclusive endpoints.
Axis parse_axis(std::string_view spec);

struct RegionCell {
  Status status = Status::WellPosed;
  Reason reason = Reason::ThetaNonpositive;
  std::optional<double> delta_psi;
  std::optional<double> explosion_time;
  std::optional<double> max_lambda;

  friend bool operator==(const RegionCell&, const RegionCell&) = default;
};

struct RegionGrid {
  Axis axis1;
  Axis axis2;
  Regime regime = Regime::F;
  std::vector<RegionCell> cells;  // row-major: i1 * axis2.values.size() + i2

  const RegionCell& at(std::size_t i1, std::size_t i2) const {
    return cells[i1 * axis2.values.size() + i2];
  }
};

/// Copy of `base` with a scalar parameter replaced (d = 1 only).
ModelParams with_parameter(const ModelParams& base, std::string_view name,
                           double value);

/// Evaluates every cell independently; `threads` = 0 uses the hardware
/// concurrency. Results do not depend on the thread count.
RegionGrid region_sweep(const ModelParams& base, const Axis& axis1,
                        const Axis& axis2, Regime regime,
                        std::size_t steps = 0, std::size_t threads = 0);

enum class Criterion { DeltaZero, ExplosionEqualsHorizon };

Criterion parse_criterion(std::string_view name);

/// DeltaZero: Δ_ψ(x). ExplosionEqualsHorizon: T^E(x) − T (+∞ when bounded).
double criterion_value(const ModelParams& base, std::string_view param,
                       Criterion criterion, double x);

/// Bisection on [lo, hi] to 1e-8 absolute. Throws NoSignChange.
double critical_value(const ModelParams& base, std::string_view param,
                      Criterion criterion, std::pair<double, double> bracket);

}  // namespace driftbound
