#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "driftbound/linalg.hpp"
#include "driftbound/model.hpp"

namespace driftbound {

/// Integration is stopped when ‖A‖_F exceeds this value.
inline constexpr double kExplosionNorm = 1e8;
/// ... or when the step-doubling error estimate of A exceeds this (relative).
inline constexpr double kExplosionStepError = 1e-3;
inline constexpr std::size_t kMinSteps = 100;
inline constexpr double kDefaultStepsPerYear = 2000.0;

struct Explosion {
  /// Forward time of the last accepted grid point; values at earlier grid
  /// points are absent.
  double exploded_at = 0.0;
  double norm_at_stop = 0.0;
};

/// Solution of the terminal-value system
///   A' = −2AΣ_μA + κᵀA + Aκ − ψΣ_R⁻¹,        A(T) = 0
///   B' = −2Aκμ̄ + (κᵀ − 2AΣ_μ)B,               B(T) = 0
///   C' = −½BᵀΣ_μB − Bᵀκμ̄ − tr(Σ_μA),          C(T) = 0
/// stored forward-indexed on [0, T] although it is integrated backward.
struct RiccatiSolution {
  std::vector<double> grid;
  std::vector<Matrix> A;  // A[i] is empty (0×0) for i < first_valid
  std::vector<Vector> B;
  std::vector<double> C;
  std::size_t first_valid = 0;
  double psi = 0.0;
  std::optional<Explosion> explosion;

  bool exploded() const { return explosion.has_value(); }
  bool has_value(std::size_t i) const { return i >= first_valid && i < grid.size(); }
  /// Index of grid point `t` (tolerance 1e-9·max(1,T)); throws NotOnGrid.
  std::size_t index_of(double t) const;
};

/// Diagnostics of the scalar (d = 1) Riccati equation.
struct OneDimDiagnostics {
  double delta_psi = 0.0;   // Δ_ψ = 4κ²(1 − 2ψ(σ_μ/(κσ_R))²)
  double half_root = 0.0;   // δ_ψ = √|Δ_ψ| / 2
  double explosion_time = 0.0;  // T^E, +∞ when Δ_ψ ≥ 0 or ψ ≤ 0
};

std::size_t default_steps(double horizon);

/// 0 = t_0 < … < t_steps = T, uniform.
std::vector<double> uniform_grid(double horizon, std::size_t steps);

/// Uniform grid with `knots` (inside [0, T]) inserted as extra nodes.
std::vector<double> grid_with_knots(double horizon, std::size_t steps,
                                    std::span<const double> knots);

/// Classical RK4 backward from T on a uniform grid; every step is repeated as
/// two half steps and the half-step result is kept. A is symmetrised after
/// each step. ψ = 0 returns the zero solution. Requires steps ≥ 100.
RiccatiSolution solve_abc(const ModelParams& params, double psi,
                          std::size_t steps);

/// Same on an arbitrary increasing grid from 0 to T.
RiccatiSolution solve_abc(const ModelParams& params, double psi,
                          std::span<const double> grid);

/// d(t, m) = exp(mᵀA(t)m + B(t)ᵀm + C(t)) at grid point t.
double eval_d(const RiccatiSolution& sol, double t, const Vector& m);

OneDimDiagnostics discriminant(const ModelParams& params, double psi);

double explosion_time(const ModelParams& params, double psi);

/// Closed-form scalar A as a function of backward time s = T − t.
///   Δ < 0: (κ + δ tan(δs − atan(κ/δ))) / (2σ_μ²)
///   Δ > 0: (c/a)(1 − e^{−2δs}) / (r₊ − r₋e^{−2δs}),  r± = (κ ± δ)/a
///   Δ = 0: a r² s / (1 + a r s),                       r = κ/a
/// with a = 2σ_μ², c = ψ/σ_R². Throws BeyondExplosion for s ≥ T^E.
double closed_form_A(const ModelParams& params, double psi, double s);

}  // namespace driftbound
