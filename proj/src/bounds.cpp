#include "driftbound/bounds.hpp"

#include <cmath>
#include <limits>

#include "driftbound/error.hpp"

namespace driftbound {

namespace {

void require_unexploded(const RiccatiSolution& sol) {
  if (sol.exploded() || sol.first_valid != 0)
    throw Error(ErrorCode::ExplodedRiccati,
                "Riccati solution exploded at t = " +
                    std::to_string(sol.explosion ? sol.explosion->exploded_at : 0.0));
}

BoundReport degenerate_report(const ModelParams& params, Regime regime) {
  BoundReport r;
  r.regime = regime;
  if (params.theta < 0.0) {
    r.kind = BoundKind::NonpositiveUtility;
    r.bound = 0.0;
  } else {
    r.kind = BoundKind::LogUtilityFinite;
    r.bound = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace

Vector quad_exp_eigenvalues(const Matrix& U, const Matrix& Sigma_Y) {
  const Matrix S = psd_sqrt(Sigma_Y);
  const Vector ev = sym_eigenvalues(S * symmetrized(U) * S);
  return (Vector::Ones(ev.size()) - 2.0 * ev).reverse();
}

double gaussian_quad_exp_expectation(const Vector& mu_Y, const Matrix& Sigma_Y,
                                     const Matrix& U, const Vector& b) {
  const Eigen::Index d = mu_Y.size();
  const Vector ev = quad_exp_eigenvalues(U, Sigma_Y);
  if (!(ev.minCoeff() > 0.0))
    throw Error(ErrorCode::EigenvalueConditionViolated,
                "smallest eigenvalue of I - 2U*Sigma_Y is " +
                    std::to_string(ev.minCoeff()));
  const Matrix M = Matrix::Identity(d, d) - 2.0 * U * Sigma_Y;
  const Vector x = mu_Y + b;
  const double exponent = x.dot(M.partialPivLu().solve(U * x));
  return std::exp(exponent - 0.5 * ev.array().log().sum());
}

BoundReport full_info_bound(const ModelParams& params, const RiccatiSolution& sol,
                            const Vector& mu0) {
  if (params.theta <= 0.0) {
    BoundReport r = degenerate_report(params, Regime::F);
    if (!sol.exploded() && sol.first_valid == 0) r.d00 = eval_d(sol, 0.0, mu0);
    return r;
  }
  require_unexploded(sol);
  BoundReport r;
  r.regime = Regime::F;
  r.d00 = eval_d(sol, 0.0, mu0);
  const double theta = params.theta;
  r.bound = std::pow(params.x0, theta) *
            (std::pow(*r.d00, 1.0 - theta) / theta);
  return r;
}

BoundReport partial_info_bound(const ModelParams& params,
                               const RiccatiSolution& sol, const Vector& m0,
                               const Matrix& q0, Regime regime) {
  if (params.theta <= 0.0) {
    BoundReport r = degenerate_report(params, regime);
    if (!sol.exploded() && sol.first_valid == 0) r.d00 = eval_d(sol, 0.0, m0);
    return r;
  }
  require_unexploded(sol);
  const Eigen::Index d = params.dim_d;
  const Matrix& A = sol.A.front();
  const Vector& B = sol.B.front();

  BoundReport r;
  r.regime = regime;
  r.d00 = eval_d(sol, 0.0, m0);
  r.K = Matrix(Matrix::Identity(d, d) - 2.0 * A * q0);
  // eig(I − 2Aq0) = 1 − 2 eig(q0^{1/2} A q0^{1/2}).
  r.eigenvalues_of_K = quad_exp_eigenvalues(A, q0);
  r.a = Vector(2.0 * A * m0 + B);
  if (!(r.eigenvalues_of_K->minCoeff() > 0.0))
    throw Error(ErrorCode::EigenvalueConditionViolated,
                "smallest eigenvalue of K = I - 2A(0)q0 is " +
                    std::to_string(r.eigenvalues_of_K->minCoeff()));

  const double theta = params.theta;
  const double log_det_K = r.eigenvalues_of_K->array().log().sum();
  const Vector k_inv_a = r.K->partialPivLu().solve(*r.a);
  const double quad = r.a->dot(q0 * k_inv_a);
  r.C0H = std::pow(*r.d00, 1.0 - theta) * std::exp(-0.5 * log_det_K + 0.5 * quad);
  r.bound = std::pow(params.x0, theta) * (*r.C0H / theta);
  return r;
}

}  // namespace driftbound
