#include <cmath>

#include <doctest.h>

#include "driftbound/error.hpp"
#include "driftbound/filter.hpp"
#include "driftbound/riccati.hpp"
#include "test_support.hpp"

namespace driftbound {
namespace {

using testing::baseline;
using testing::baseline_json;

ModelParams with_experts() {
  nlohmann::json raw = baseline_json();
  raw["expert_gamma"] = 1.0 / 6.0;
  raw["expert_arrivals"] = {0.0, 0.2, 0.45, 0.7, 0.95};
  raw["sigma_J"] = 0.25;
  return validate_params(raw);
}

ModelParams two_asset() {
  nlohmann::json raw = baseline_json();
  raw["dim_d"] = 2;
  raw["sigma_R"] = {{0.3, 0.0}, {0.1, 0.25}};
  raw["sigma_mu"] = {{0.8, 0.0}, {0.3, 0.9}};
  raw["kappa"] = {{2.0, 0.4}, {-0.2, 3.0}};
  raw["mu_bar"] = {0.0, 0.0};
  raw["m0"] = {0.0, 0.0};
  raw["q0"] = {{0.3, 0.05}, {0.05, 0.2}};
  raw["expert_gamma"] = {{0.2, 0.0}, {0.0, 0.4}};
  raw["expert_arrivals"] = {0.3, 0.6};
  raw["sigma_J"] = {{0.5, 0.0}, {0.0, 0.3}};
  return validate_params(raw);
}

bool psd_leq(const Matrix& lhs, const Matrix& rhs, double tol) {
  return lambda_min_sym(rhs - lhs) >= -tol;
}

TEST_CASE("regime names") {
  for (Regime r : {Regime::R, Regime::J, Regime::Z, Regime::F})
    CHECK(parse_regime(to_string(r)) == r);
  CHECK_THROWS_AS(parse_regime("G"), Error);
}

TEST_CASE("regime R on baseline decreases monotonically toward 0.125") {
  const CovariancePath path = covariance_path(baseline(), Regime::R, 2000);
  CHECK(path.Q.front()(0, 0) == doctest::Approx(1.0 / 6.0));
  for (std::size_t i = 1; i < path.Q.size(); ++i) CHECK(path.Q[i](0, 0) < path.Q[i - 1](0, 0));
  CHECK(path.Q.back()(0, 0) > 0.125);
  CHECK(path.Q.back()(0, 0) < 1.0 / 6.0);
  CHECK(path.Q.back()(0, 0) == doctest::Approx(0.125).epsilon(1e-4));
}

TEST_CASE("regime F is identically zero") {
  const CovariancePath path = covariance_path(baseline(), Regime::F, 100);
  for (const Matrix& q : path.Q) CHECK(q.norm() == 0.0);
}

TEST_CASE("single expert opinion update") {
  nlohmann::json raw = baseline_json();
  raw["expert_gamma"] = 0.1;
  raw["expert_arrivals"] = {0.5};
  const CovariancePath path = covariance_path(validate_params(raw), Regime::Z, 2000);
  REQUIRE(path.jumps.size() == 1);
  const CovarianceJump& j = path.jumps.front();
  CHECK(j.time == 0.5);
  const double expected = 1.0 / (1.0 / j.Q_minus(0, 0) + 10.0);
  CHECK(j.Q_plus(0, 0) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(j.Q_plus(0, 0) < j.Q_minus(0, 0));
  CHECK(path.Q[j.index](0, 0) == j.Q_plus(0, 0));
}

TEST_CASE("jump update examples") {
  CHECK(jump_update(Matrix::Zero(1, 1), Matrix::Constant(1, 1, 0.3)).norm() == 0.0);
  CHECK(jump_update(Matrix::Constant(1, 1, 1.0 / 6.0), Matrix::Constant(1, 1, 1.0 / 6.0))(0, 0) ==
        doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  Matrix gamma = Matrix::Zero(2, 2);
  gamma.diagonal() << 1.0, 3.0;
  const Matrix q = jump_update(Matrix::Identity(2, 2), gamma);
  CHECK(q(0, 0) == doctest::Approx(0.5));
  CHECK(q(1, 1) == doctest::Approx(0.75));
  CHECK(std::abs(q(0, 1)) < 1e-15);
  try {
    jump_update(Matrix::Identity(2, 2), Matrix::Zero(2, 2));
    FAIL("expected SingularGamma");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularGamma);
  }
}

TEST_CASE("expert configuration must be present for J and Z") {
  for (Regime r : {Regime::J, Regime::Z}) {
    try {
      covariance_path(baseline(), r, 100);
      FAIL("expected MissingExpertConfig");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingExpertConfig);
    }
  }
}

TEST_CASE("arrivals must lie on a caller-provided grid") {
  const std::vector<double> grid = uniform_grid(1.0, 100);
  nlohmann::json raw = baseline_json();
  raw["expert_gamma"] = 0.1;
  raw["expert_arrivals"] = {0.505};
  try {
    covariance_path(validate_params(raw), Regime::Z, grid);
    FAIL("expected NotOnGrid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOnGrid);
  }
}

TEST_CASE("an arrival at t = 0 updates the prior") {
  const CovariancePath path = covariance_path(with_experts(), Regime::Z, 1000);
  REQUIRE_FALSE(path.jumps.empty());
  CHECK(path.jumps.front().index == 0);
  CHECK(path.Q.front()(0, 0) == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("stationary covariance") {
  CHECK(stationary_covariance(baseline(), Regime::R)(0, 0) == 0.125);
  nlohmann::json raw = baseline_json();
  raw["sigma_J"] = 0.25;
  const ModelParams pj = validate_params(raw);
  const double root = (-3.0 + std::sqrt(41.0)) / 32.0;
  CHECK(stationary_covariance(pj, Regime::J)(0, 0) == doctest::Approx(root).epsilon(1e-14));
  CHECK(stationary_covariance(pj, Regime::J)(0, 0) == doctest::Approx(0.1063476324).epsilon(1e-9));

  ModelParams frozen = baseline();
  frozen.sigma_mu = Matrix::Zero(1, 1);
  CHECK(stationary_covariance(frozen, Regime::R)(0, 0) == 0.0);

  CHECK_THROWS_AS(stationary_covariance(baseline(), Regime::Z), Error);

  const ModelParams p2 = two_asset();
  for (Regime r : {Regime::R, Regime::J}) {
    const Matrix q = stationary_covariance(p2, r);
    CHECK(stationary_residual(p2, r, q) <= 1e-8);
    CHECK(lambda_min_sym(q) > 0.0);
  }
  CHECK(stationary_residual(baseline(), Regime::R, stationary_covariance(baseline(), Regime::R)) <= 1e-8);
}

TEST_CASE("information ordering J and Z below R") {
  for (const ModelParams& p : {with_experts(), two_asset()}) {
    const CovariancePath z = covariance_path(p, Regime::Z, 1000);
    const CovariancePath r = covariance_path(p, Regime::R, z.grid);
    const CovariancePath j = covariance_path(p, Regime::J, z.grid);
    REQUIRE(r.grid == z.grid);
    for (std::size_t i = 0; i < z.grid.size(); ++i) {
      CHECK(psd_leq(j.Q[i], r.Q[i], 1e-9));
      CHECK(psd_leq(z.Q[i], r.Q[i], 1e-9));
    }
    for (const CovarianceJump& jump : z.jumps) {
      CHECK(psd_leq(jump.Q_plus, jump.Q_minus, 1e-12));
      CHECK(lambda_max_sym(jump.Q_plus) <= lambda_max_sym(jump.Q_minus) + 1e-12);
    }
  }
}

TEST_CASE("distance to the stationary root decreases") {
  const ModelParams p = baseline();
  const Matrix limit = stationary_covariance(p, Regime::R);
  const CovariancePath path = covariance_path(p, Regime::R, 500);
  for (std::size_t i = 1; i < path.Q.size(); ++i)
    CHECK((path.Q[i] - limit).norm() < (path.Q[i - 1] - limit).norm());

  const ModelParams p2 = two_asset();
  const Matrix limit2 = stationary_covariance(p2, Regime::R);
  nlohmann::json raw = to_json(p2);
  raw["horizon_T"] = 20.0;
  const CovariancePath long_path = covariance_path(validate_params(raw), Regime::R, 20000);
  CHECK((long_path.Q.back() - limit2).norm() < 1e-8);
}

TEST_CASE("covariance ODE step") {
  const ModelParams p = baseline();
  const Matrix omega = information_rate(p, Regime::R);
  CHECK(omega(0, 0) == doctest::Approx(16.0));
  const Matrix fixed = stationary_covariance(p, Regime::R);
  const Matrix next = covariance_ode_step(fixed, p.kappa, p.Sigma_mu(), omega, 1e-3);
  CHECK(std::abs(next(0, 0) - fixed(0, 0)) < 1e-14);
  CHECK(information_rate(p, Regime::F).norm() == 0.0);
}

}  // namespace
}  // namespace driftbound
