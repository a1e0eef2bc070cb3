#pragma once

#include <optional>

#include "driftbound/filter.hpp"
#include "driftbound/linalg.hpp"
#include "driftbound/model.hpp"
#include "driftbound/riccati.hpp"

namespace driftbound {

enum class BoundKind {
  Numeric,
  /// θ < 0: utility is negative, so 0 bounds the value function.
  NonpositiveUtility,
  /// θ = 0: the value function is finite; no numeric constant is computed.
  LogUtilityFinite,
};

struct BoundReport {
  Regime regime = Regime::F;
  BoundKind kind = BoundKind::Numeric;
  double bound = 0.0;
  std::optional<double> d00;
  // Partial-information intermediates.
  std::optional<Matrix> K;
  std::optional<Vector> a;
  std::optional<double> C0H;
  std::optional<Vector> eigenvalues_of_K;
};

/// Eigenvalues of I − 2UΣ, computed as 1 − 2 eig(S U S) with S = Σ^{1/2}.
/// Real for symmetric U and PSD Σ.
Vector quad_exp_eigenvalues(const Matrix& U, const Matrix& Sigma_Y);

/// E[exp{(Y+b)ᵀU(Y+b)}] for Y ~ N(μ_Y, Σ_Y), Σ_Y PSD:
///   det(I − 2UΣ_Y)^{−1/2} exp{(μ_Y+b)ᵀ(I − 2UΣ_Y)⁻¹U(μ_Y+b)}.
/// Throws EigenvalueConditionViolated if some eigenvalue of I − 2UΣ_Y ≤ 0.
double gaussian_quad_exp_expectation(const Vector& mu_Y, const Matrix& Sigma_Y,
                                     const Matrix& U, const Vector& b);

/// (x0^θ/θ) d(0, μ0)^{1−θ}.
BoundReport full_info_bound(const ModelParams& params, const RiccatiSolution& sol,
                            const Vector& mu0);

/// (x0^θ/θ) C_0^H with
///   C_0^H = d(0,m0)^{1−θ} det(K)^{−1/2} exp{½ aᵀ q0 K⁻¹ a},
///   K = I − 2A(0)q0,  a = 2A(0)m0 + B(0).
BoundReport partial_info_bound(const ModelParams& params,
                               const RiccatiSolution& sol, const Vector& m0,
                               const Matrix& q0, Regime regime = Regime::R);

}  // namespace driftbound
