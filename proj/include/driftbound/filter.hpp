#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "driftbound/linalg.hpp"
#include "driftbound/model.hpp"

namespace driftbound {

/// Investor information regime: returns only (R), returns and continuous
/// expert (J), returns and discrete expert opinions (Z), full drift
/// observation (F).
enum class Regime { R, J, Z, F };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view name);

/// Eigenvalues below this abort covariance propagation; values in
/// [floor, 0) are treated as round-off and clipped.
inline constexpr double kPsdFloor = -1e-10;

struct CovarianceJump {
  std::size_t index = 0;  // grid index of the arrival
  double time = 0.0;
  Matrix Q_minus;
  Matrix Q_plus;
};

/// Conditional drift covariance on a time grid. Q[i] is the value at grid[i];
/// at an arrival it is the post-jump value and the left limit lives in
/// `jumps`.
struct CovariancePath {
  Regime regime = Regime::R;
  std::vector<double> grid;
  std::vector<Matrix> Q;
  std::vector<CovarianceJump> jumps;
  std::vector<double> arrivals;
};

/// Ω in dQ/dt = −κQ − Qκᵀ + Σ_μ − QΩQ: Σ_R⁻¹ for R and Z, Σ_R⁻¹ + Σ_J⁻¹
/// for J, zero for F.
Matrix information_rate(const ModelParams& params, Regime regime);

/// One classical RK4 step of the covariance ODE, symmetrised and projected
/// onto the PSD cone. Throws LostPositivity below kPsdFloor.
Matrix covariance_ode_step(const Matrix& Q, const Matrix& kappa,
                           const Matrix& Sigma_mu, const Matrix& omega,
                           double h);

/// Forward propagation from Q(0) = q0 on the uniform grid with `steps`
/// intervals (expert arrivals inserted as nodes for regime Z).
CovariancePath covariance_path(const ModelParams& params, Regime regime,
                               std::size_t steps);

/// Same on a caller-provided grid; for regime Z every arrival must be a node.
CovariancePath covariance_path(const ModelParams& params, Regime regime,
                               std::span<const double> grid);

/// Bayesian update with an N(μ, Γ) opinion: Q⁺ = Q⁻ − Q⁻(Q⁻ + Γ)⁻¹Q⁻.
Matrix jump_update(const Matrix& Q_minus, const Matrix& gamma);

/// Stabilising root of −κQ − Qκᵀ + Σ_μ − QΩQ = 0, regimes R and J.
/// Closed form for d = 1, Newton–Kleinman iteration otherwise.
Matrix stationary_covariance(const ModelParams& params, Regime regime);

/// Frobenius norm of the algebraic Riccati residual at Q.
double stationary_residual(const ModelParams& params, Regime regime,
                           const Matrix& Q);

}  // namespace driftbound
