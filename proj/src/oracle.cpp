#include "driftbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <span>
#include <thread>

#include "driftbound/error.hpp"

namespace driftbound {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::BadValue, "dt must be > 0");
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(horizon / dt)));
}

// Calls batch(engine, first, count) for each stream of kPathsPerStream paths,
// spreading streams over worker threads.
template <typename Batch>
void run_streams(std::size_t n_paths, std::uint64_t seed, std::size_t threads,
                 Batch batch) {
  const std::size_t streams = (n_paths + kPathsPerStream - 1) / kPathsPerStream;
  std::vector<std::exception_ptr> errors(streams);
  auto run = [&](std::size_t k) {
    try {
      Engine engine = stream_engine(seed, k);
      const std::size_t first = k * kPathsPerStream;
      batch(engine, first, std::min(kPathsPerStream, n_paths - first));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  std::size_t workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(streams, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < streams; ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < streams; k += workers) run(k);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void fill_normal(Vector& z, Engine& engine, std::normal_distribution<double>& normal) {
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(engine);
}

// Scalar transition coefficients for the d = 1 fast paths.
struct ScalarOu {
  double mu_bar;
  double decay;
  double noise_sd;
};

ScalarOu scalar_ou(const OuTransition& tr) {
  return {tr.mu_bar(0), tr.decay(0, 0), tr.noise_root(0, 0)};
}

}  // namespace

Engine stream_engine(std::uint64_t seed, std::uint64_t stream) {
  return Engine(splitmix64(seed ^ stream));
}

OuTransition::OuTransition(const ModelParams& params, double dt)
    : mu_bar(params.mu_bar) {
  if (params.dim_d == 1) {
    const double k = params.kappa(0, 0);
    const double s = params.Sigma_mu()(0, 0);
    decay = Matrix::Constant(1, 1, std::exp(-k * dt));
    noise_cov = Matrix::Constant(1, 1, -s * std::expm1(-2.0 * k * dt) / (2.0 * k));
  } else {
    decay = expm(-dt * params.kappa);
    const Matrix V = stationary_drift_covariance(params.kappa, params.sigma_mu);
    noise_cov = symmetrized(V - decay * V * decay.transpose());
  }
  noise_root = psd_sqrt(noise_cov);
}

McEstimate summarize(const std::vector<double>& values) {
  McEstimate est;
  est.n_paths = values.size();
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  if (std::all_of(values.begin(), values.end(), [&](double x) { return x == values.front(); })) {
    est.mean = values.front();
    return est;
  }
  est.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(), [&](double x) {
      const double dev = x - est.mean;
      return dev * dev;
    });
    est.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return est;
}

std::vector<Vector> simulate_ou(const ModelParams& params, const Vector& mu0,
                                double dt, std::size_t n_steps,
                                std::uint64_t seed) {
  if (!(dt > 0.0)) throw Error(ErrorCode::BadValue, "dt must be > 0");
  const OuTransition tr(params, dt);
  Engine engine = stream_engine(seed, 0);
  std::normal_distribution<double> normal;
  std::vector<Vector> path;
  path.reserve(n_steps + 1);
  Vector mu = mu0;
  Vector z(params.dim_d);
  path.push_back(mu);
  for (std::size_t k = 0; k < n_steps; ++k) {
    fill_normal(z, engine, normal);
    mu = tr.mu_bar + tr.decay * (mu - tr.mu_bar) + tr.noise_root * z;
    path.push_back(mu);
  }
  return path;
}

std::vector<Vector> simulate_ou_terminal(const ModelParams& params,
                                         const Vector& mu0, double dt,
                                         std::size_t n_steps,
                                         std::size_t n_paths,
                                         std::uint64_t seed,
                                         std::size_t threads) {
  if (!(dt > 0.0)) throw Error(ErrorCode::BadValue, "dt must be > 0");
  const OuTransition tr(params, dt);
  std::vector<Vector> out(n_paths);
  run_streams(n_paths, seed, threads, [&](Engine& engine, std::size_t first, std::size_t count) {
    std::normal_distribution<double> normal;
    Vector z(params.dim_d);
    Vector mu(params.dim_d);
    for (std::size_t p = first; p < first + count; ++p) {
      mu = mu0;
      for (std::size_t k = 0; k < n_steps; ++k) {
        fill_normal(z, engine, normal);
        mu = tr.mu_bar + tr.decay * (mu - tr.mu_bar) + tr.noise_root * z;
      }
      out[p] = mu;
    }
  });
  return out;
}

McEstimate mc_d_estimate(const ModelParams& params, double psi, const Vector& m,
                         double dt, std::size_t n_paths, std::uint64_t seed,
                         std::size_t threads) {
  const std::size_t n_steps = step_count(params.horizon_T, dt);
  const double h = params.horizon_T / static_cast<double>(n_steps);
  const OuTransition tr(params, h);
  const Eigen::Index d = params.dim_d;
  const Matrix Sigma_R_inv =
      symmetrized(params.Sigma_R().llt().solve(Matrix::Identity(d, d)));
  std::vector<double> values(n_paths);

  run_streams(n_paths, seed, threads, [&](Engine& engine, std::size_t first, std::size_t count) {
    std::normal_distribution<double> normal;
    if (d == 1) {
      const ScalarOu ou = scalar_ou(tr);
      const double w = Sigma_R_inv(0, 0);
      for (std::size_t p = first; p < first + count; ++p) {
        double mu = m(0);
        double f_prev = w * mu * mu;
        double integral = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
          mu = ou.mu_bar + ou.decay * (mu - ou.mu_bar) + ou.noise_sd * normal(engine);
          const double f = w * mu * mu;
          integral += 0.5 * (f_prev + f);
          f_prev = f;
        }
        values[p] = std::exp(psi * integral * h);
      }
      return;
    }
    Vector z(d);
    Vector mu(d);
    for (std::size_t p = first; p < first + count; ++p) {
      mu = m;
      double f_prev = mu.dot(Sigma_R_inv * mu);
      double integral = 0.0;
      for (std::size_t k = 0; k < n_steps; ++k) {
        fill_normal(z, engine, normal);
        mu = tr.mu_bar + tr.decay * (mu - tr.mu_bar) + tr.noise_root * z;
        const double f = mu.dot(Sigma_R_inv * mu);
        integral += 0.5 * (f_prev + f);
        f_prev = f;
      }
      values[p] = std::exp(psi * integral * h);
    }
  });

  McEstimate est = summarize(values);
  est.dt = dt;
  est.seed = seed;
  return est;
}

McEstimate mc_gauss_quad_exp(const Vector& mu_Y, const Matrix& Sigma_Y,
                             const Matrix& U, const Vector& b, std::size_t n,
                             std::uint64_t seed, std::size_t threads) {
  const Matrix root = psd_sqrt(Sigma_Y);
  const Vector shift = mu_Y + b;
  std::vector<double> values(n);
  run_streams(n, seed, threads, [&](Engine& engine, std::size_t first, std::size_t count) {
    std::normal_distribution<double> normal;
    Vector z(mu_Y.size());
    Vector y(mu_Y.size());
    for (std::size_t p = first; p < first + count; ++p) {
      fill_normal(z, engine, normal);
      y = shift + root * z;
      values[p] = std::exp(y.dot(U * y));
    }
  });
  McEstimate est = summarize(values);
  est.seed = seed;
  return est;
}

McEstimate mc_expected_utility(const ModelParams& params, const Vector& const_pi,
                               double dt, std::size_t n_paths,
                               std::uint64_t seed, std::size_t threads) {
  if (params.theta == 0.0 || !(params.theta < 1.0))
    throw Error(ErrorCode::BadTheta, "expected utility oracle requires theta in (-inf,0) or (0,1)");
  const Eigen::Index d = params.dim_d;
  if (const_pi.size() != d) throw Error(ErrorCode::BadShape, "pi must have length dim_d");
  const std::size_t n_steps = step_count(params.horizon_T, dt);
  const double T = params.horizon_T;
  const double h = T / static_cast<double>(n_steps);
  const double theta = params.theta;
  const OuTransition tr(params, h);
  const Matrix prior_root = psd_sqrt(params.q0);
  // πᵀσ_R W_T is Gaussian with variance T πᵀΣ_Rπ.
  const double pi_var = const_pi.dot(params.Sigma_R() * const_pi);
  const double log_drift = std::log(params.x0) - 0.5 * pi_var * T;
  const double noise_sd = std::sqrt(pi_var * T);
  std::vector<double> values(n_paths);

  run_streams(n_paths, seed, threads, [&](Engine& engine, std::size_t first, std::size_t count) {
    std::normal_distribution<double> normal;
    Vector z(d);
    Vector mu(d);
    const bool scalar = d == 1;
    const ScalarOu ou = scalar_ou(tr);
    for (std::size_t p = first; p < first + count; ++p) {
      fill_normal(z, engine, normal);
      mu = params.m0 + prior_root * z;
      double integral = 0.0;
      if (scalar) {
        const double pi = const_pi(0);
        double x = mu(0);
        double f_prev = pi * x;
        for (std::size_t k = 0; k < n_steps; ++k) {
          x = ou.mu_bar + ou.decay * (x - ou.mu_bar) + ou.noise_sd * normal(engine);
          const double f = pi * x;
          integral += 0.5 * (f_prev + f);
          f_prev = f;
        }
      } else {
        double f_prev = const_pi.dot(mu);
        for (std::size_t k = 0; k < n_steps; ++k) {
          fill_normal(z, engine, normal);
          mu = tr.mu_bar + tr.decay * (mu - tr.mu_bar) + tr.noise_root * z;
          const double f = const_pi.dot(mu);
          integral += 0.5 * (f_prev + f);
          f_prev = f;
        }
      }
      const double log_x = log_drift + integral * h + noise_sd * normal(engine);
      values[p] = std::exp(theta * log_x) / theta;
    }
  });

  McEstimate est = summarize(values);
  est.dt = dt;
  est.seed = seed;
  return est;
}

}  // namespace driftbound
