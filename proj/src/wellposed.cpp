#include "driftbound/wellposed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "driftbound/error.hpp"
#include "driftbound/riccati.hpp"

namespace driftbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool known_axis(std::string_view name) {
  return name == "theta" || name == "T" || name == "sigma_R" ||
         name == "sigma_mu" || name == "kappa" || name == "q0";
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::Config, "bad number '" + std::string(text) + "' in " +
                                       std::string(what));
  return value;
}

void require_psd(const Matrix& m, const char* what) {
  const Vector ev = sym_eigenvalues(m);
  if (ev.minCoeff() < -1e-10 * std::max(1.0, std::abs(ev.maxCoeff())))
    throw Error(ErrorCode::NotPSD, std::string(what) + " is not positive semidefinite");
}

}  // namespace

std::string_view to_string(Status status) {
  return status == Status::WellPosed ? "WellPosed" : "NotGuaranteed";
}

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::ThetaNonpositive: return "ThetaNonpositive";
    case Reason::DeltaNonnegative: return "DeltaNonnegative";
    case Reason::HorizonBelowExplosion: return "HorizonBelowExplosion";
    case Reason::RiccatiBounded: return "RiccatiBounded";
    case Reason::RiccatiExploded: return "RiccatiExploded";
    case Reason::CovarianceConditionFailed: return "CovarianceConditionFailed";
  }
  return "?";
}

Status parse_status(std::string_view name) {
  if (name == "WellPosed") return Status::WellPosed;
  if (name == "NotGuaranteed") return Status::NotGuaranteed;
  throw Error(ErrorCode::Config, "unknown status '" + std::string(name) + "'");
}

Reason parse_reason(std::string_view name) {
  for (Reason r : {Reason::ThetaNonpositive, Reason::DeltaNonnegative,
                   Reason::HorizonBelowExplosion, Reason::RiccatiBounded,
                   Reason::RiccatiExploded, Reason::CovarianceConditionFailed}) {
    if (to_string(r) == name) return r;
  }
  throw Error(ErrorCode::Config, "unknown reason '" + std::string(name) + "'");
}

Verdict check_full(const ModelParams& params, std::size_t steps) {
  Verdict v;
  v.regime = Regime::F;
  if (params.theta <= 0.0) {
    v.status = Status::WellPosed;
    v.reason = Reason::ThetaNonpositive;
    return v;
  }
  const double psi = risk_coefficient(params.theta).psi;

  if (params.dim_d == 1) {
    const OneDimDiagnostics diag = discriminant(params, psi);
    v.details.delta_psi = diag.delta_psi;
    v.details.explosion_time = diag.explosion_time;
    if (diag.delta_psi >= 0.0) {
      v.status = Status::WellPosed;
      v.reason = Reason::DeltaNonnegative;
    } else if (params.horizon_T < diag.explosion_time) {
      v.status = Status::WellPosed;
      v.reason = Reason::HorizonBelowExplosion;
    } else {
      v.status = Status::NotGuaranteed;
      v.reason = Reason::RiccatiExploded;
    }
    return v;
  }

  const std::size_t n = steps == 0 ? default_steps(params.horizon_T) : steps;
  const RiccatiSolution sol = solve_abc(params, psi, n);
  if (sol.exploded()) {
    v.status = Status::NotGuaranteed;
    v.reason = Reason::RiccatiExploded;
    v.details.explosion_time = params.horizon_T - sol.explosion->exploded_at;
  } else {
    v.status = Status::WellPosed;
    v.reason = Reason::RiccatiBounded;
  }
  return v;
}

double lambda_max_product(const Matrix& A, const Matrix& Q) {
  require_psd(A, "A");
  require_psd(Q, "Q");
  const Matrix S = psd_sqrt(A);
  return std::max(0.0, lambda_max_sym(S * Q * S));
}

Verdict check_partial(const ModelParams& params, Regime regime,
                      std::size_t steps) {
  Verdict v = check_full(params, steps);
  if (regime == Regime::F) return v;
  v.regime = regime;
  if (v.status != Status::WellPosed || params.theta <= 0.0) return v;

  const double psi = risk_coefficient(params.theta).psi;
  const std::size_t n = steps == 0 ? default_steps(params.horizon_T) : steps;
  std::vector<double> knots;
  if (regime == Regime::Z && params.expert_arrivals) knots = *params.expert_arrivals;
  const std::vector<double> grid = grid_with_knots(params.horizon_T, n, knots);

  std::vector<Matrix> A(grid.size());
  if (params.dim_d == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      A[i] = Matrix::Constant(1, 1, closed_form_A(params, psi, params.horizon_T - grid[i]));
  } else {
    RiccatiSolution sol = solve_abc(params, psi, grid);
    if (sol.exploded()) {
      v.status = Status::NotGuaranteed;
      v.reason = Reason::RiccatiExploded;
      v.details.explosion_time = params.horizon_T - sol.explosion->exploded_at;
      return v;
    }
    A = std::move(sol.A);
  }

  const CovariancePath path = covariance_path(params, regime, grid);
  const double limit = 0.5 - kCovarianceGuard;
  double max_lambda = 0.0;
  std::optional<double> first_violation;
  auto visit = [&](std::size_t i, const Matrix& Q) {
    const double lambda = lambda_max_product(A[i], Q);
    max_lambda = std::max(max_lambda, lambda);
    if (!(lambda < limit) && !first_violation) first_violation = grid[i];
  };
  std::size_t next_jump = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (next_jump < path.jumps.size() && path.jumps[next_jump].index == i) {
      visit(i, path.jumps[next_jump].Q_minus);
      ++next_jump;
    }
    visit(i, path.Q[i]);
  }

  v.details.max_lambda = max_lambda;
  if (first_violation) {
    v.status = Status::NotGuaranteed;
    v.reason = Reason::CovarianceConditionFailed;
    v.details.first_violation_time = first_violation;
  }
  return v;
}

Axis parse_axis(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = spec.find(':', start);
    parts.push_back(spec.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 4)
    throw Error(ErrorCode::Config, "axis must be name:lo:hi:count, got '" +
                                       std::string(spec) + "'");
  Axis axis;
  axis.name = std::string(parts[0]);
  if (!known_axis(axis.name))
    throw Error(ErrorCode::UnknownAxis, "unknown axis '" + axis.name + "'");
  const double lo = parse_double(parts[1], spec);
  const double hi = parse_double(parts[2], spec);
  const double count_d = parse_double(parts[3], spec);
  if (count_d < 1 || std::floor(count_d) != count_d)
    throw Error(ErrorCode::Config, "axis count must be a positive integer");
  const auto count = static_cast<std::size_t>(count_d);
  axis.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    axis.values[i] = count == 1 ? lo
                                : lo + (hi - lo) * static_cast<double>(i) /
                                           static_cast<double>(count - 1);
  }
  if (count > 1) axis.values.back() = hi;
  return axis;
}

ModelParams with_parameter(const ModelParams& base, std::string_view name,
                           double value) {
  if (!known_axis(name))
    throw Error(ErrorCode::UnknownAxis, "unknown parameter '" + std::string(name) + "'");
  if (base.dim_d != 1)
    throw Error(ErrorCode::NotOneDimensional, "parameter sweeps require dim_d = 1");
  ModelParams p = base;
  if (name == "theta") {
    p.theta = value;
  } else if (name == "T") {
    p.horizon_T = value;
    if (p.expert_arrivals) {
      std::erase_if(*p.expert_arrivals, [value](double t) { return t > value; });
    }
  } else if (name == "sigma_R") {
    p.sigma_R = Matrix::Constant(1, 1, value);
  } else if (name == "sigma_mu") {
    p.sigma_mu = Matrix::Constant(1, 1, value);
  } else if (name == "kappa") {
    p.kappa = Matrix::Constant(1, 1, value);
  } else if (name == "q0") {
    p.q0 = Matrix::Constant(1, 1, value);
  }
  return p;
}

RegionGrid region_sweep(const ModelParams& base, const Axis& axis1,
                        const Axis& axis2, Regime regime, std::size_t steps,
                        std::size_t threads) {
  for (const Axis* axis : {&axis1, &axis2}) {
    if (!known_axis(axis->name))
      throw Error(ErrorCode::UnknownAxis, "unknown axis '" + axis->name + "'");
  }
  if (base.dim_d != 1)
    throw Error(ErrorCode::NotOneDimensional, "region sweeps require dim_d = 1");

  RegionGrid out;
  out.axis1 = axis1;
  out.axis2 = axis2;
  out.regime = regime;
  const std::size_t n2 = axis2.values.size();
  const std::size_t total = axis1.values.size() * n2;
  out.cells.resize(total);
  std::vector<std::exception_ptr> errors(total);

  auto evaluate = [&](std::size_t k) {
    try {
      ModelParams p = with_parameter(base, axis1.name, axis1.values[k / n2]);
      p = validate_params(with_parameter(p, axis2.name, axis2.values[k % n2]));
      const Verdict v = check_partial(p, regime, steps);
      const OneDimDiagnostics diag =
          discriminant(p, risk_coefficient(p.theta).psi);
      RegionCell& cell = out.cells[k];
      cell.status = v.status;
      cell.reason = v.reason;
      cell.delta_psi = diag.delta_psi;
      cell.explosion_time = diag.explosion_time;
      cell.max_lambda = v.details.max_lambda;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  std::size_t workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(total, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < total; ++k) evaluate(k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < total; k += workers) evaluate(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Criterion parse_criterion(std::string_view name) {
  if (name == "DeltaZero") return Criterion::DeltaZero;
  if (name == "ExplosionEqualsHorizon") return Criterion::ExplosionEqualsHorizon;
  throw Error(ErrorCode::Config, "unknown criterion '" + std::string(name) + "'");
}

double criterion_value(const ModelParams& base, std::string_view param,
                       Criterion criterion, double x) {
  const ModelParams p = with_parameter(base, param, x);
  const OneDimDiagnostics diag = discriminant(p, risk_coefficient(p.theta).psi);
  if (criterion == Criterion::DeltaZero) return diag.delta_psi;
  return diag.explosion_time == kInf ? kInf : diag.explosion_time - p.horizon_T;
}

double critical_value(const ModelParams& base, std::string_view param,
                      Criterion criterion, std::pair<double, double> bracket) {
  auto [lo, hi] = bracket;
  if (lo > hi) std::swap(lo, hi);
  const double f_lo = criterion_value(base, param, criterion, lo);
  const double f_hi = criterion_value(base, param, criterion, hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi))
    throw Error(ErrorCode::NoSignChange,
                "criterion has the same sign at both ends of the bracket");
  const bool lo_negative = std::signbit(f_lo);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = criterion_value(base, param, criterion, mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == lo_negative)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace driftbound
