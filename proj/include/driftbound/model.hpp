#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "driftbound/linalg.hpp"

namespace driftbound {

/// Market model: returns dR = μ dt + σ_R dW^R, drift dμ = κ(μ̄ − μ) dt + σ_μ dW^μ,
/// power utility U(x) = x^θ/θ, plus the optional expert channels (discrete
/// opinions with noise covariance Γ at fixed arrival times, continuous expert
/// with volatility σ_J).
///
/// Instances returned by validate_params() satisfy all model invariants.
/// Mutating a copy (parameter sweeps) requires validating it again.
struct ModelParams {
  double horizon_T = 1.0;
  double theta = 0.0;
  int dim_d = 1;
  Matrix sigma_R;   // d × d1
  Matrix sigma_mu;  // d × d2
  Matrix kappa;     // d × d
  Vector mu_bar;
  double x0 = 1.0;
  Vector m_bar0;
  Matrix q_bar0;
  Vector m0;
  Matrix q0;
  std::optional<Matrix> expert_gamma;
  std::optional<std::vector<double>> expert_arrivals;
  std::optional<Matrix> sigma_J;  // d × d3

  Matrix Sigma_R() const { return sigma_R * sigma_R.transpose(); }
  Matrix Sigma_mu() const { return sigma_mu * sigma_mu.transpose(); }
  std::optional<Matrix> Sigma_J() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// ψ = θ / (2(1 − θ)²), the exponent scale of the bound process.
struct RiskCoefficient {
  double psi = 0.0;
};

/// Mandatory keys: horizon_T, theta, dim_d, sigma_R, sigma_mu, kappa, mu_bar,
/// m0, q0. Optional: x0 (default 1), m_bar0 / q_bar0 (default m0 / q0),
/// expert_gamma, expert_arrivals, sigma_J.
///
/// Matrices are nested row-major arrays; a bare number is accepted as a 1×1
/// matrix and as a length-1 vector. Throws ValidationError listing every
/// violation.
ModelParams validate_params(const nlohmann::json& raw);

/// Re-validates an in-memory parameter set (symmetrising near-symmetric
/// inputs). Idempotent on valid inputs.
ModelParams validate_params(const ModelParams& params);

nlohmann::json to_json(const ModelParams& params);

/// Reads a JSON config file and validates it.
ModelParams load_params(const std::filesystem::path& path);

RiskCoefficient risk_coefficient(double theta);

/// Stationary covariance V of the drift: κV + Vκᵀ = σ_μσ_μᵀ.
Matrix stationary_drift_covariance(const Matrix& kappa, const Matrix& sigma_mu);

}  // namespace driftbound
