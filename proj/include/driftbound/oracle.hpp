#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "driftbound/linalg.hpp"
#include "driftbound/model.hpp"

namespace driftbound {

/// Monte Carlo estimate. `std_error` is the sample standard deviation over
/// √n_paths.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

/// Paths are simulated in batches of kPathsPerStream. Batch k draws from its
/// own engine seeded with splitmix64(seed ^ k), so estimates are reproducible
/// for any thread count.
inline constexpr std::size_t kPathsPerStream = 4096;

using Engine = std::mt19937_64;
Engine stream_engine(std::uint64_t seed, std::uint64_t stream);

/// Exact one-step OU transition μ' = μ̄ + e^{−κΔ}(μ − μ̄) + η,
/// η ~ N(0, V − e^{−κΔ}Ve^{−κᵀΔ}) with κV + Vκᵀ = Σ_μ.
struct OuTransition {
  Matrix decay;
  Matrix noise_root;
  Matrix noise_cov;
  Vector mu_bar;

  OuTransition(const ModelParams& params, double dt);
};

/// One path μ_0 = mu0, …, μ_{n_steps}, from stream 0.
std::vector<Vector> simulate_ou(const ModelParams& params, const Vector& mu0,
                                double dt, std::size_t n_steps,
                                std::uint64_t seed);

/// Terminal values μ_{n_steps} of n_paths independent paths.
std::vector<Vector> simulate_ou_terminal(const ModelParams& params,
                                         const Vector& mu0, double dt,
                                         std::size_t n_steps,
                                         std::size_t n_paths,
                                         std::uint64_t seed,
                                         std::size_t threads = 0);

/// Estimates d(0, m) = E[exp{ψ ∫_0^T μᵀΣ_R⁻¹μ du}] with μ_0 = m, trapezoidal
/// time quadrature on steps of size T / round(T / dt).
McEstimate mc_d_estimate(const ModelParams& params, double psi, const Vector& m,
                         double dt, std::size_t n_paths, std::uint64_t seed,
                         std::size_t threads = 0);

/// Estimates E[exp{(Y+b)ᵀU(Y+b)}], Y ~ N(μ_Y, Σ_Y).
McEstimate mc_gauss_quad_exp(const Vector& mu_Y, const Matrix& Sigma_Y,
                             const Matrix& U, const Vector& b, std::size_t n,
                             std::uint64_t seed, std::size_t threads = 0);

/// Estimates E[U_θ(X_T)] for a constant strategy π, with μ_0 ~ N(m0, q0) per
/// path and log X_T = log x0 + ∫(πᵀμ − ½πᵀΣ_Rπ)dt + πᵀσ_R W_T.
McEstimate mc_expected_utility(const ModelParams& params, const Vector& const_pi,
                               double dt, std::size_t n_paths,
                               std::uint64_t seed, std::size_t threads = 0);

/// Mean and standard error of `values`, using pairwise summation.
McEstimate summarize(const std::vector<double>& values);

}  // namespace driftbound
