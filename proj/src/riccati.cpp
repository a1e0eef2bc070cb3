#include "driftbound/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "driftbound/error.hpp"

namespace driftbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct State {
  Matrix A;
  Vector B;
  double C = 0.0;
};

// Coefficients of the system in backward time s = T − t: dY/ds = −dY/dt.
struct System {
  Matrix kappa;
  Matrix kappa_t;
  Matrix Sigma_mu;
  Matrix Sigma_R_inv;
  Vector kappa_mu_bar;
  double psi;

  State rate(const State& y) const {
    State r;
    const Matrix a_sigma = y.A * Sigma_mu;
    r.A = 2.0 * a_sigma * y.A - kappa_t * y.A - y.A * kappa + psi * Sigma_R_inv;
    r.B = 2.0 * y.A * kappa_mu_bar - (kappa_t - 2.0 * a_sigma) * y.B;
    r.C = 0.5 * y.B.dot(Sigma_mu * y.B) + y.B.dot(kappa_mu_bar) +
          (Sigma_mu * y.A).trace();
    return r;
  }
};

State axpy(const State& y, double h, const State& k) {
  return {y.A + h * k.A, y.B + h * k.B, y.C + h * k.C};
}

State rk4(const System& sys, const State& y, double h) {
  const State k1 = sys.rate(y);
  const State k2 = sys.rate(axpy(y, 0.5 * h, k1));
  const State k3 = sys.rate(axpy(y, 0.5 * h, k2));
  const State k4 = sys.rate(axpy(y, h, k3));
  State out;
  out.A = y.A + (h / 6.0) * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A);
  out.B = y.B + (h / 6.0) * (k1.B + 2.0 * k2.B + 2.0 * k3.B + k4.B);
  out.C = y.C + (h / 6.0) * (k1.C + 2.0 * k2.C + 2.0 * k3.C + k4.C);
  out.A = symmetrized(out.A);
  return out;
}

bool finite(const State& y) {
  return y.A.allFinite() && y.B.allFinite() && std::isfinite(y.C);
}

struct ScalarCoeffs {
  double kappa;
  double var_mu;  // σ_μ²
  double var_R;   // σ_R²
};

ScalarCoeffs scalar_coeffs(const ModelParams& p) {
  if (p.dim_d != 1)
    throw Error(ErrorCode::NotOneDimensional, "requires dim_d = 1");
  return {p.kappa(0, 0), p.Sigma_mu()(0, 0), p.Sigma_R()(0, 0)};
}

}  // namespace

std::size_t RiccatiSolution::index_of(double t) const {
  if (grid.empty()) throw Error(ErrorCode::NotOnGrid, "empty grid");
  const double tol = 1e-9 * std::max(1.0, grid.back());
  const auto it = std::lower_bound(grid.begin(), grid.end(), t - tol);
  if (it == grid.end() || std::abs(*it - t) > tol)
    throw Error(ErrorCode::NotOnGrid, "t = " + std::to_string(t));
  return static_cast<std::size_t>(it - grid.begin());
}

std::size_t default_steps(double horizon) {
  return std::max(kMinSteps,
                  static_cast<std::size_t>(std::ceil(kDefaultStepsPerYear * horizon)));
}

std::vector<double> uniform_grid(double horizon, std::size_t steps) {
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    grid[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  grid.back() = horizon;
  return grid;
}

std::vector<double> grid_with_knots(double horizon, std::size_t steps,
                                    std::span<const double> knots) {
  std::vector<double> grid = uniform_grid(horizon, steps);
  const double tol = 1e-9 * std::max(1.0, horizon);
  for (double k : knots) {
    if (k < 0.0 || k > horizon) continue;
    const auto it = std::lower_bound(grid.begin(), grid.end(), k);
    const bool near_next = it != grid.end() && std::abs(*it - k) <= tol;
    const bool near_prev = it != grid.begin() && std::abs(*(it - 1) - k) <= tol;
    if (!near_next && !near_prev) grid.insert(it, k);
  }
  return grid;
}

RiccatiSolution solve_abc(const ModelParams& params, double psi,
                          std::size_t steps) {
  if (steps < kMinSteps)
    throw Error(ErrorCode::BadValue, "steps must be >= " + std::to_string(kMinSteps));
  const auto grid = uniform_grid(params.horizon_T, steps);
  return solve_abc(params, psi, grid);
}

RiccatiSolution solve_abc(const ModelParams& params, double psi,
                          std::span<const double> grid) {
  if (grid.size() < 2 || grid.front() != 0.0 ||
      std::abs(grid.back() - params.horizon_T) > 1e-12 * params.horizon_T)
    throw Error(ErrorCode::BadValue, "grid must run from 0 to T");

  const Eigen::Index d = params.dim_d;
  const std::size_t n = grid.size();
  RiccatiSolution sol;
  sol.grid.assign(grid.begin(), grid.end());
  sol.psi = psi;
  sol.A.assign(n, Matrix());
  sol.B.assign(n, Vector());
  sol.C.assign(n, 0.0);

  State y{Matrix::Zero(d, d), Vector::Zero(d), 0.0};
  sol.A[n - 1] = y.A;
  sol.B[n - 1] = y.B;
  sol.first_valid = n - 1;

  if (psi == 0.0) {
    std::fill(sol.A.begin(), sol.A.end(), y.A);
    std::fill(sol.B.begin(), sol.B.end(), y.B);
    sol.first_valid = 0;
    return sol;
  }

  const Matrix Sigma_R_inv = params.Sigma_R().llt().solve(Matrix::Identity(d, d));
  const System sys{params.kappa,
                   params.kappa.transpose(),
                   params.Sigma_mu(),
                   symmetrized(Sigma_R_inv),
                   params.kappa * params.mu_bar,
                   psi};

  for (std::size_t i = n - 1; i-- > 0;) {
    const double h = grid[i + 1] - grid[i];
    const State full = rk4(sys, y, h);
    const State half = rk4(sys, rk4(sys, y, 0.5 * h), 0.5 * h);
    const double a_norm = half.A.norm();
    const double err = (full.A - half.A).norm() /
                       std::max(a_norm, std::numeric_limits<double>::min());
    if (!finite(full) || !finite(half) || a_norm > kExplosionNorm ||
        !(err <= kExplosionStepError)) {
      sol.explosion = Explosion{grid[i + 1], y.A.norm()};
      return sol;
    }
    y = half;
    sol.A[i] = y.A;
    sol.B[i] = y.B;
    sol.C[i] = y.C;
    sol.first_valid = i;
  }
  return sol;
}

double eval_d(const RiccatiSolution& sol, double t, const Vector& m) {
  const std::size_t i = sol.index_of(t);
  if (!sol.has_value(i))
    throw Error(ErrorCode::ExplodedRegion,
                "t = " + std::to_string(t) + " precedes the explosion point");
  return std::exp(m.dot(sol.A[i] * m) + sol.B[i].dot(m) + sol.C[i]);
}

OneDimDiagnostics discriminant(const ModelParams& params, double psi) {
  const ScalarCoeffs c = scalar_coeffs(params);
  OneDimDiagnostics out;
  const double ratio = c.var_mu / (c.kappa * c.kappa * c.var_R);
  out.delta_psi = 4.0 * c.kappa * c.kappa * (1.0 - 2.0 * psi * ratio);
  out.half_root = 0.5 * std::sqrt(std::abs(out.delta_psi));
  if (psi <= 0.0 || out.delta_psi >= 0.0) {
    out.explosion_time = kInf;
  } else {
    const double delta = out.half_root;
    out.explosion_time =
        (std::numbers::pi / 2.0 + std::atan(c.kappa / delta)) / delta;
  }
  return out;
}

double explosion_time(const ModelParams& params, double psi) {
  return discriminant(params, psi).explosion_time;
}

double closed_form_A(const ModelParams& params, double psi, double s) {
  const ScalarCoeffs c = scalar_coeffs(params);
  if (psi == 0.0 || s == 0.0) return 0.0;
  const OneDimDiagnostics diag = discriminant(params, psi);
  const double a = 2.0 * c.var_mu;
  const double source = psi / c.var_R;
  const double delta = diag.half_root;

  if (diag.delta_psi < 0.0) {
    if (s >= diag.explosion_time)
      throw Error(ErrorCode::BeyondExplosion,
                  "s = " + std::to_string(s) + " >= T^E = " +
                      std::to_string(diag.explosion_time));
    return (c.kappa + delta * std::tan(delta * s - std::atan(c.kappa / delta))) / a;
  }
  if (diag.delta_psi > 0.0) {
    const double r_plus = (c.kappa + delta) / a;
    const double r_minus = (c.kappa - delta) / a;
    const double decay = std::exp(-2.0 * delta * s);
    return (source / a) * (1.0 - decay) / (r_plus - r_minus * decay);
  }
  const double r = c.kappa / a;
  return a * r * r * s / (1.0 + a * r * s);
}

}  // namespace driftbound
