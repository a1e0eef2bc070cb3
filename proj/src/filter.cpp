#include "driftbound/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftbound/error.hpp"
#include "driftbound/riccati.hpp"

namespace driftbound {

namespace {

Matrix inverse_pd(const Matrix& m) {
  return symmetrized(m.llt().solve(Matrix::Identity(m.rows(), m.cols())));
}

Matrix covariance_rate(const Matrix& Q, const Matrix& kappa,
                       const Matrix& Sigma_mu, const Matrix& omega) {
  return -kappa * Q - Q * kappa.transpose() + Sigma_mu - Q * omega * Q;
}

void require_expert_config(const ModelParams& p, Regime regime) {
  if (regime == Regime::J && !p.sigma_J)
    throw Error(ErrorCode::MissingExpertConfig, "regime J requires sigma_J");
  if (regime == Regime::Z && (!p.expert_gamma || !p.expert_arrivals))
    throw Error(ErrorCode::MissingExpertConfig,
                "regime Z requires expert_gamma and expert_arrivals");
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::R: return "R";
    case Regime::J: return "J";
    case Regime::Z: return "Z";
    case Regime::F: return "F";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  if (name == "R") return Regime::R;
  if (name == "J") return Regime::J;
  if (name == "Z") return Regime::Z;
  if (name == "F") return Regime::F;
  throw Error(ErrorCode::UnsupportedRegime, "unknown regime '" + std::string(name) + "'");
}

Matrix information_rate(const ModelParams& params, Regime regime) {
  const Eigen::Index d = params.dim_d;
  switch (regime) {
    case Regime::F:
      return Matrix::Zero(d, d);
    case Regime::R:
    case Regime::Z:
      return inverse_pd(params.Sigma_R());
    case Regime::J:
      require_expert_config(params, regime);
      return inverse_pd(params.Sigma_R()) + inverse_pd(*params.Sigma_J());
  }
  return Matrix::Zero(d, d);
}

Matrix covariance_ode_step(const Matrix& Q, const Matrix& kappa,
                           const Matrix& Sigma_mu, const Matrix& omega,
                           double h) {
  const Matrix k1 = covariance_rate(Q, kappa, Sigma_mu, omega);
  const Matrix k2 = covariance_rate(Q + 0.5 * h * k1, kappa, Sigma_mu, omega);
  const Matrix k3 = covariance_rate(Q + 0.5 * h * k2, kappa, Sigma_mu, omega);
  const Matrix k4 = covariance_rate(Q + h * k3, kappa, Sigma_mu, omega);
  Matrix next = Q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite() || !project_psd(next, kPsdFloor))
    throw Error(ErrorCode::LostPositivity, "covariance left the PSD cone");
  return next;
}

CovariancePath covariance_path(const ModelParams& params, Regime regime,
                               std::size_t steps) {
  std::vector<double> knots;
  if (regime == Regime::Z) {
    require_expert_config(params, regime);
    knots = *params.expert_arrivals;
  }
  const auto grid = grid_with_knots(params.horizon_T, steps, knots);
  return covariance_path(params, regime, grid);
}

CovariancePath covariance_path(const ModelParams& params, Regime regime,
                               std::span<const double> grid) {
  require_expert_config(params, regime);
  CovariancePath path;
  path.regime = regime;
  path.grid.assign(grid.begin(), grid.end());
  const std::size_t n = grid.size();
  const Eigen::Index d = params.dim_d;

  if (regime == Regime::F) {
    path.Q.assign(n, Matrix::Zero(d, d));
    return path;
  }

  // Map each arrival to its grid node.
  std::vector<std::size_t> arrival_index;
  if (regime == Regime::Z) {
    path.arrivals = *params.expert_arrivals;
    const double tol = 1e-9 * std::max(1.0, params.horizon_T);
    for (double t : path.arrivals) {
      const auto it = std::lower_bound(path.grid.begin(), path.grid.end(), t - tol);
      if (it == path.grid.end() || std::abs(*it - t) > tol)
        throw Error(ErrorCode::NotOnGrid,
                    "expert arrival " + std::to_string(t) + " is not a grid node");
      arrival_index.push_back(static_cast<std::size_t>(it - path.grid.begin()));
    }
  }

  const Matrix omega = information_rate(params, regime);
  const Matrix Sigma_mu = params.Sigma_mu();
  path.Q.reserve(n);
  Matrix Q = params.q0;
  std::size_t next_arrival = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      Q = covariance_ode_step(Q, params.kappa, Sigma_mu, omega,
                              path.grid[i] - path.grid[i - 1]);
    }
    while (next_arrival < arrival_index.size() && arrival_index[next_arrival] == i) {
      CovarianceJump jump;
      jump.index = i;
      jump.time = path.arrivals[next_arrival];
      jump.Q_minus = Q;
      Q = jump_update(Q, *params.expert_gamma);
      jump.Q_plus = Q;
      path.jumps.push_back(std::move(jump));
      ++next_arrival;
    }
    path.Q.push_back(Q);
  }
  return path;
}

Matrix jump_update(const Matrix& Q_minus, const Matrix& gamma) {
  const Vector ev = sym_eigenvalues(gamma);
  if (!(ev.maxCoeff() > 0.0) || !(ev.minCoeff() > 1e-12 * ev.maxCoeff()))
    throw Error(ErrorCode::SingularGamma, "expert noise covariance is not positive definite");
  const Matrix total = symmetrized(Q_minus + gamma);
  Matrix Q_plus = Q_minus - Q_minus * total.ldlt().solve(Q_minus);
  if (!project_psd(Q_plus, kPsdFloor))
    throw Error(ErrorCode::LostPositivity, "jump update left the PSD cone");
  return Q_plus;
}

double stationary_residual(const ModelParams& params, Regime regime,
                           const Matrix& Q) {
  return covariance_rate(Q, params.kappa, params.Sigma_mu(),
                         information_rate(params, regime))
      .norm();
}

Matrix stationary_covariance(const ModelParams& params, Regime regime) {
  if (regime != Regime::R && regime != Regime::J)
    throw Error(ErrorCode::UnsupportedRegime,
                "stationary covariance is defined for regimes R and J");
  const Matrix omega = information_rate(params, regime);
  const Matrix Sigma_mu = params.Sigma_mu();

  if (params.dim_d == 1) {
    const double k = params.kappa(0, 0);
    const double w = omega(0, 0);
    const double s = Sigma_mu(0, 0);
    // (−κ + √(κ² + σ_μ²Ω)) / Ω written without cancellation.
    return Matrix::Constant(1, 1, s / (k + std::sqrt(k * k + s * w)));
  }

  // Newton–Kleinman from Q = 0:
  // (κ + Q_kΩ) Q_{k+1} + Q_{k+1} (κ + Q_kΩ)ᵀ = Σ_μ + Q_kΩQ_k.
  Matrix Q = Matrix::Zero(params.dim_d, params.dim_d);
  for (int iter = 0; iter < 100; ++iter) {
    const Matrix closed = params.kappa + Q * omega;
    const Matrix next = solve_lyapunov(closed, Sigma_mu + Q * omega * Q);
    const double change = (next - Q).norm();
    Q = next;
    if (change <= 1e-15 * std::max(1.0, Q.norm())) break;
  }
  return Q;
}

}  // namespace driftbound
