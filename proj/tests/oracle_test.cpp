#include <cmath>

#include <doctest.h>

#include "driftbound/bounds.hpp"
#include "driftbound/error.hpp"
#include "driftbound/oracle.hpp"
#include "driftbound/riccati.hpp"
#include "test_support.hpp"

namespace driftbound {
namespace {

using testing::kD00;
using testing::kPsi;
using testing::baseline;
using testing::baseline_with;

struct Moments {
  double mean;
  double var;
};

Moments moments(const std::vector<Vector>& xs) {
  std::vector<double> v;
  for (const Vector& x : xs) v.push_back(x(0));
  const McEstimate e = summarize(v);
  double ss = 0.0;
  for (double x : v) ss += (x - e.mean) * (x - e.mean);
  return {e.mean, ss / static_cast<double>(v.size() - 1)};
}

TEST_CASE("exact OU transition coefficients") {
  const ModelParams p = baseline();
  const OuTransition tr(p, 0.01);
  CHECK(tr.decay(0, 0) == doctest::Approx(std::exp(-0.03)).epsilon(1e-15));
  CHECK(tr.noise_cov(0, 0) == doctest::Approx((1.0 - std::exp(-0.06)) / 6.0).epsilon(1e-14));

  nlohmann::json raw = testing::baseline_json();
  raw["dim_d"] = 2;
  raw["sigma_R"] = {{0.25, 0.0}, {0.0, 0.25}};
  raw["sigma_mu"] = {{1.0, 0.0}, {0.0, 0.5}};
  raw["kappa"] = {{3.0, 0.0}, {0.0, 1.0}};
  raw["mu_bar"] = {0.0, 0.0};
  raw["m0"] = {0.0, 0.0};
  raw["q0"] = {{0.1, 0.0}, {0.0, 0.1}};
  const OuTransition tr2(validate_params(raw), 0.5);
  CHECK(tr2.decay(1, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
  CHECK(tr2.noise_cov(1, 1) == doctest::Approx(0.25 * (1.0 - std::exp(-1.0)) / 2.0).epsilon(1e-12));
  CHECK(std::abs(tr2.noise_cov(0, 1)) < 1e-15);
}

TEST_CASE("one-step sample moments") {
  const ModelParams p = baseline_with("mu_bar", 0.2);
  const double dt = 0.1;
  const std::size_t n = 1000000;
  const Moments m = moments(simulate_ou_terminal(p, Vector::Constant(1, 1.0), dt, 1, n, 3));
  const double mean = 0.2 + 0.8 * std::exp(-0.3);
  const double var = (1.0 - std::exp(-0.6)) / 6.0;
  CHECK(std::abs(m.mean - mean) < 4.0 * std::sqrt(var / n));
  CHECK(std::abs(m.var - var) < 4.0 * var * std::sqrt(2.0 / n));
}

TEST_CASE("simulated paths") {
  ModelParams still = baseline_with("mu_bar", 0.4);
  still.sigma_mu = Matrix::Zero(1, 1);
  for (const Vector& x : simulate_ou(still, Vector::Constant(1, 0.4), 0.01, 100, 1))
    CHECK(x(0) == doctest::Approx(0.4).epsilon(1e-15));

  const auto path = simulate_ou(baseline(), Vector::Zero(1), 0.01, 100, 1);
  CHECK(path.size() == 101);
  CHECK(path == simulate_ou(baseline(), Vector::Zero(1), 0.01, 100, 1));

  const Moments m = moments(simulate_ou_terminal(baseline(), Vector::Zero(1), 1e-3, 1000, 100000, 5));
  const double var = (1.0 - std::exp(-6.0)) / 6.0;
  CHECK(var == doctest::Approx(0.166253541).epsilon(1e-9));
  CHECK(std::abs(m.var - var) < 3.0 * var * std::sqrt(2.0 / 100000));

  const Moments f = moments(simulate_ou_terminal(baseline_with("kappa", 50.0), Vector::Constant(1, 3.0),
                                                 0.01, 100, 20000, 9));
  CHECK(std::abs(f.mean) < 3.0 * std::sqrt(f.var / 20000));
}

TEST_CASE("d estimate: trivial and deterministic cases") {
  const McEstimate zero = mc_d_estimate(baseline(), 0.0, Vector::Zero(1), 1e-2, 1000, 1);
  CHECK(zero.mean == 1.0);
  CHECK(zero.std_error == 0.0);

  const double c = 0.7;
  ModelParams constant = baseline_with("mu_bar", c);
  constant.sigma_mu = Matrix::Zero(1, 1);
  const McEstimate flat = mc_d_estimate(constant, kPsi, Vector::Constant(1, c), 1e-3, 100, 1);
  CHECK(flat.mean == doctest::Approx(std::exp(kPsi * c * c / 0.0625)).epsilon(1e-12));
  CHECK(flat.std_error == 0.0);

  ModelParams decaying = baseline();
  decaying.sigma_mu = Matrix::Zero(1, 1);
  const McEstimate dec = mc_d_estimate(decaying, kPsi, Vector::Constant(1, c), 1e-3, 100, 1);
  const double integral = c * c * (1.0 - std::exp(-6.0)) / 6.0;
  CHECK(dec.mean == doctest::Approx(std::exp(kPsi * integral / 0.0625)).epsilon(1e-5));
}

TEST_CASE("d estimate agrees with the Riccati value") {
  const McEstimate e = mc_d_estimate(baseline(), kPsi, Vector::Zero(1), 2e-3, 40000, 11);
  CHECK(std::abs(e.mean - kD00) < 3.0 * e.std_error);

  const ModelParams p = baseline_with("mu_bar", 0.2);
  const Vector m = Vector::Constant(1, 0.5);
  const double exact = eval_d(solve_abc(p, kPsi, default_steps(1.0)), 0.0, m);
  const McEstimate e2 = mc_d_estimate(p, kPsi, m, 2e-3, 40000, 12);
  CHECK(std::abs(e2.mean - exact) < 3.0 * e2.std_error);
}

TEST_CASE("halving dt moves the d estimate by less than two standard errors") {
  const McEstimate coarse = mc_d_estimate(baseline(), kPsi, Vector::Zero(1), 2e-3, 20000, 21);
  const McEstimate fine = mc_d_estimate(baseline(), kPsi, Vector::Zero(1), 1e-3, 20000, 21);
  const double combined = std::hypot(coarse.std_error, fine.std_error);
  CHECK(std::abs(coarse.mean - fine.mean) < 2.0 * combined);
}

TEST_CASE("gaussian oracle") {
  const McEstimate unit = mc_gauss_quad_exp(Vector::Zero(1), Matrix::Identity(1, 1),
                                            Matrix::Zero(1, 1), Vector::Zero(1), 1000, 1);
  CHECK(unit.mean == 1.0);
  CHECK(unit.std_error == 0.0);

  const McEstimate e = mc_gauss_quad_exp(Vector::Zero(1), Matrix::Identity(1, 1),
                                         Matrix::Constant(1, 1, 0.25), Vector::Zero(1), 200000, 2);
  CHECK(std::abs(e.mean - std::sqrt(2.0)) < 3.0 * e.std_error);

  Vector mu(2), b(2);
  mu << 0.1, 0.0;
  b << 0.0, 0.3;
  Matrix U = Matrix::Zero(2, 2);
  U.diagonal() << 0.1, 0.2;
  const double exact = gaussian_quad_exp_expectation(mu, Matrix::Identity(2, 2), U, b);
  const McEstimate e2 = mc_gauss_quad_exp(mu, Matrix::Identity(2, 2), U, b, 200000, 3);
  CHECK(std::abs(e2.mean - exact) < 3.0 * e2.std_error);
}

TEST_CASE("expected utility oracle") {
  const McEstimate idle = mc_expected_utility(baseline(), Vector::Zero(1), 1e-2, 1000, 1);
  CHECK(idle.mean == doctest::Approx(1.0 / 0.3).epsilon(1e-14));
  CHECK(idle.std_error == doctest::Approx(0.0).epsilon(1e-12));

  const McEstimate averse =
      mc_expected_utility(baseline_with("theta", -1.0), Vector::Zero(1), 1e-2, 1000, 1);
  CHECK(averse.mean == doctest::Approx(-1.0).epsilon(1e-14));

  CHECK_THROWS_AS(mc_expected_utility(baseline_with("theta", 0.0), Vector::Zero(1), 1e-2, 10, 1),
                  Error);

  const RiccatiSolution sol = solve_abc(baseline(), kPsi, default_steps(1.0));
  const double bound = partial_info_bound(baseline(), sol, baseline().m0, baseline().q0).bound;
  for (double pi : {0.0, 0.5, 1.0}) {
    const McEstimate e =
        mc_expected_utility(baseline(), Vector::Constant(1, pi), 1e-2, 20000, 31);
    CHECK(e.mean <= bound + 3.0 * e.std_error);
  }
}

TEST_CASE("estimates are reproducible and independent of the thread count") {
  const Vector m = Vector::Zero(1);
  const McEstimate a = mc_d_estimate(baseline(), kPsi, m, 1e-2, 10000, 77, 1);
  const McEstimate b = mc_d_estimate(baseline(), kPsi, m, 1e-2, 10000, 77, 1);
  const McEstimate c = mc_d_estimate(baseline(), kPsi, m, 1e-2, 10000, 77, 3);
  const McEstimate other = mc_d_estimate(baseline(), kPsi, m, 1e-2, 10000, 78, 1);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.mean == c.mean);
  CHECK(a.std_error == c.std_error);
  CHECK(a.mean != other.mean);
  CHECK(a.seed == 77);
  CHECK(a.n_paths == 10000);

  const McEstimate u1 = mc_expected_utility(baseline(), Vector::Ones(1), 1e-2, 9000, 5, 1);
  const McEstimate u4 = mc_expected_utility(baseline(), Vector::Ones(1), 1e-2, 9000, 5, 4);
  CHECK(u1.mean == u4.mean);
}

TEST_CASE("summarize") {
  const McEstimate e = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(summarize({}).n_paths == 0);
}

TEST_CASE("stream engines differ per stream") {
  Engine a = stream_engine(1, 0);
  Engine b = stream_engine(1, 1);
  CHECK(a() != b());
}

}  // namespace
}  // namespace driftbound
