#include "driftbound/model.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "driftbound/error.hpp"

namespace driftbound {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDefiniteTol = 1e-12;

using Json = nlohmann::json;

class Collector {
 public:
  void add(ErrorCode code, std::string field, std::string message = {}) {
    violations_.push_back({code, std::move(field), std::move(message)});
  }
  bool ok() const { return violations_.empty(); }
  std::size_t size() const { return violations_.size(); }
  void throw_if_any() const {
    if (!violations_.empty()) throw ValidationError(violations_);
  }

 private:
  std::vector<Violation> violations_;
};

std::optional<double> read_scalar(const Json& raw, const char* key,
                                  Collector& errs, bool required) {
  if (!raw.contains(key) || raw.at(key).is_null()) {
    if (required) errs.add(ErrorCode::MissingField, key);
    return std::nullopt;
  }
  const Json& v = raw.at(key);
  if (!v.is_number()) {
    errs.add(ErrorCode::BadShape, key, "expected a number");
    return std::nullopt;
  }
  return v.get<double>();
}

std::optional<Matrix> read_matrix(const Json& raw, const char* key,
                                  Collector& errs, bool required) {
  if (!raw.contains(key) || raw.at(key).is_null()) {
    if (required) errs.add(ErrorCode::MissingField, key);
    return std::nullopt;
  }
  const Json& v = raw.at(key);
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty() || !v.front().is_array()) {
    errs.add(ErrorCode::BadShape, key, "expected a nested row-major array");
    return std::nullopt;
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = v.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      errs.add(ErrorCode::BadShape, key, "ragged rows");
      return std::nullopt;
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Json& x = row.at(static_cast<std::size_t>(j));
      if (!x.is_number()) {
        errs.add(ErrorCode::BadShape, key, "non-numeric entry");
        return std::nullopt;
      }
      m(i, j) = x.get<double>();
    }
  }
  return m;
}

std::optional<Vector> read_vector(const Json& raw, const char* key,
                                  Collector& errs, bool required) {
  if (!raw.contains(key) || raw.at(key).is_null()) {
    if (required) errs.add(ErrorCode::MissingField, key);
    return std::nullopt;
  }
  const Json& v = raw.at(key);
  if (v.is_number()) return Vector::Constant(1, v.get<double>());
  if (!v.is_array()) {
    errs.add(ErrorCode::BadShape, key, "expected an array");
    return std::nullopt;
  }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      errs.add(ErrorCode::BadShape, key, "non-numeric entry");
      return std::nullopt;
    }
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_rows(const Matrix& m, int d, const char* field, Collector& errs) {
  if (m.rows() != d || m.cols() < 1)
    errs.add(ErrorCode::BadShape, field,
             "expected " + std::to_string(d) + " rows");
}

void check_square(const Matrix& m, int d, const char* field, Collector& errs) {
  if (m.rows() != d || m.cols() != d)
    errs.add(ErrorCode::BadShape, field,
             "expected " + std::to_string(d) + "x" + std::to_string(d));
}

// Symmetrises in place when asymmetry is within tolerance; flags otherwise.
bool make_symmetric(Matrix& m, const char* field, Collector& errs) {
  const double asym = asymmetry(m);
  if (asym > kSymmetryTol) {
    errs.add(ErrorCode::NotSymmetric, field);
    return false;
  }
  m = symmetrized(m);
  return true;
}

void check_pd(const Matrix& m, const char* field, Collector& errs) {
  const Vector ev = sym_eigenvalues(m);
  const double largest = ev.maxCoeff();
  if (!(largest > 0.0) || !(ev.minCoeff() > kDefiniteTol * largest))
    errs.add(ErrorCode::NonPositiveDefinite, field);
}

void check_psd(const Matrix& m, const char* field, Collector& errs) {
  const Vector ev = sym_eigenvalues(m);
  const double scale = std::max(1.0, std::abs(ev.maxCoeff()));
  if (ev.minCoeff() < -kDefiniteTol * scale)
    errs.add(ErrorCode::NonPositiveDefinite, field, "not positive semidefinite");
}

void check_all(ModelParams& p, Collector& errs) {
  if (!(p.horizon_T > 0.0) || !std::isfinite(p.horizon_T))
    errs.add(ErrorCode::BadValue, "horizon_T", "must be > 0");
  if (!(p.theta < 1.0) || !std::isfinite(p.theta))
    errs.add(ErrorCode::BadTheta, "theta", "must be < 1");
  if (!(p.x0 > 0.0) || !std::isfinite(p.x0))
    errs.add(ErrorCode::BadValue, "x0", "must be > 0");
  if (p.dim_d < 1) {
    errs.add(ErrorCode::BadValue, "dim_d", "must be a positive integer");
    return;
  }
  const int d = p.dim_d;
  const std::size_t scalar_errors = errs.size();

  struct Entry {
    Matrix* m;
    const char* name;
  };
  for (Entry e : {Entry{&p.sigma_R, "sigma_R"}, Entry{&p.sigma_mu, "sigma_mu"},
                  Entry{&p.kappa, "kappa"}, Entry{&p.q_bar0, "q_bar0"},
                  Entry{&p.q0, "q0"}}) {
    if (!all_finite(*e.m)) errs.add(ErrorCode::BadValue, e.name, "non-finite");
  }

  check_rows(p.sigma_R, d, "sigma_R", errs);
  check_rows(p.sigma_mu, d, "sigma_mu", errs);
  check_square(p.kappa, d, "kappa", errs);
  check_square(p.q_bar0, d, "q_bar0", errs);
  check_square(p.q0, d, "q0", errs);
  for (auto [v, name] : {std::pair{&p.mu_bar, "mu_bar"},
                         std::pair{&p.m_bar0, "m_bar0"},
                         std::pair{&p.m0, "m0"}}) {
    if (v->size() != d)
      errs.add(ErrorCode::BadShape, name, "expected length " + std::to_string(d));
    else if (!v->allFinite())
      errs.add(ErrorCode::BadValue, name, "non-finite");
  }
  if (errs.size() != scalar_errors) return;

  check_pd(p.Sigma_R(), "sigma_R", errs);
  check_pd(p.Sigma_mu(), "sigma_mu", errs);
  if (!all_eigen_real_parts_positive(p.kappa))
    errs.add(ErrorCode::UnstableKappa, "kappa",
             "eigenvalue with real part <= 0");
  if (make_symmetric(p.q_bar0, "q_bar0", errs)) check_psd(p.q_bar0, "q_bar0", errs);
  if (make_symmetric(p.q0, "q0", errs)) check_psd(p.q0, "q0", errs);

  if (p.expert_gamma) {
    Matrix& g = *p.expert_gamma;
    check_square(g, d, "expert_gamma", errs);
    if (g.rows() == d && g.cols() == d && make_symmetric(g, "expert_gamma", errs))
      check_pd(g, "expert_gamma", errs);
  }
  if (p.sigma_J) {
    check_rows(*p.sigma_J, d, "sigma_J", errs);
    if (p.sigma_J->rows() == d) check_pd(*p.Sigma_J(), "sigma_J", errs);
  }
  if (p.expert_arrivals) {
    const auto& ts = *p.expert_arrivals;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const bool in_range = ts[i] >= 0.0 && ts[i] <= p.horizon_T;
      const bool increasing = i == 0 || ts[i] > ts[i - 1];
      if (!std::isfinite(ts[i]) || !in_range || !increasing) {
        errs.add(ErrorCode::BadArrivalTimes, "expert_arrivals",
                 "must be strictly increasing within [0, T]");
        break;
      }
    }
  }
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

std::optional<Matrix> ModelParams::Sigma_J() const {
  if (!sigma_J) return std::nullopt;
  return Matrix(*sigma_J * sigma_J->transpose());
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  auto same = [](const Matrix& x, const Matrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  auto same_opt = [&](const std::optional<Matrix>& x,
                      const std::optional<Matrix>& y) {
    return x.has_value() == y.has_value() && (!x || same(*x, *y));
  };
  return a.horizon_T == b.horizon_T && a.theta == b.theta &&
         a.dim_d == b.dim_d && same(a.sigma_R, b.sigma_R) &&
         same(a.sigma_mu, b.sigma_mu) && same(a.kappa, b.kappa) &&
         same(a.mu_bar, b.mu_bar) && a.x0 == b.x0 && same(a.m_bar0, b.m_bar0) &&
         same(a.q_bar0, b.q_bar0) && same(a.m0, b.m0) && same(a.q0, b.q0) &&
         same_opt(a.expert_gamma, b.expert_gamma) &&
         a.expert_arrivals == b.expert_arrivals && same_opt(a.sigma_J, b.sigma_J);
}

ModelParams validate_params(const nlohmann::json& raw) {
  Collector errs;
  if (!raw.is_object()) {
    errs.add(ErrorCode::BadShape, "<root>", "expected an object");
    errs.throw_if_any();
  }
  ModelParams p;
  const auto T = read_scalar(raw, "horizon_T", errs, true);
  const auto theta = read_scalar(raw, "theta", errs, true);
  const auto d = read_scalar(raw, "dim_d", errs, true);
  auto sigma_R = read_matrix(raw, "sigma_R", errs, true);
  auto sigma_mu = read_matrix(raw, "sigma_mu", errs, true);
  auto kappa = read_matrix(raw, "kappa", errs, true);
  auto mu_bar = read_vector(raw, "mu_bar", errs, true);
  auto m0 = read_vector(raw, "m0", errs, true);
  auto q0 = read_matrix(raw, "q0", errs, true);
  const auto x0 = read_scalar(raw, "x0", errs, false);
  auto m_bar0 = read_vector(raw, "m_bar0", errs, false);
  auto q_bar0 = read_matrix(raw, "q_bar0", errs, false);
  p.expert_gamma = read_matrix(raw, "expert_gamma", errs, false);
  p.sigma_J = read_matrix(raw, "sigma_J", errs, false);
  if (raw.contains("expert_arrivals") && !raw.at("expert_arrivals").is_null()) {
    if (auto ts = read_vector(raw, "expert_arrivals", errs, false))
      p.expert_arrivals = std::vector<double>(ts->begin(), ts->end());
  }
  if (d && (std::floor(*d) != *d || *d < 1))
    errs.add(ErrorCode::BadValue, "dim_d", "must be a positive integer");
  errs.throw_if_any();

  p.horizon_T = *T;
  p.theta = *theta;
  p.dim_d = static_cast<int>(*d);
  p.sigma_R = std::move(*sigma_R);
  p.sigma_mu = std::move(*sigma_mu);
  p.kappa = std::move(*kappa);
  p.mu_bar = std::move(*mu_bar);
  p.m0 = std::move(*m0);
  p.q0 = std::move(*q0);
  p.x0 = x0.value_or(1.0);
  p.m_bar0 = m_bar0 ? std::move(*m_bar0) : p.m0;
  p.q_bar0 = q_bar0 ? std::move(*q_bar0) : p.q0;
  return validate_params(p);
}

ModelParams validate_params(const ModelParams& params) {
  ModelParams p = params;
  Collector errs;
  check_all(p, errs);
  errs.throw_if_any();
  return p;
}

nlohmann::json to_json(const ModelParams& p) {
  Json out;
  out["horizon_T"] = p.horizon_T;
  out["theta"] = p.theta;
  out["dim_d"] = p.dim_d;
  out["sigma_R"] = matrix_json(p.sigma_R);
  out["sigma_mu"] = matrix_json(p.sigma_mu);
  out["kappa"] = matrix_json(p.kappa);
  out["mu_bar"] = vector_json(p.mu_bar);
  out["x0"] = p.x0;
  out["m_bar0"] = vector_json(p.m_bar0);
  out["q_bar0"] = matrix_json(p.q_bar0);
  out["m0"] = vector_json(p.m0);
  out["q0"] = matrix_json(p.q0);
  if (p.expert_gamma) out["expert_gamma"] = matrix_json(*p.expert_gamma);
  if (p.expert_arrivals) out["expert_arrivals"] = *p.expert_arrivals;
  if (p.sigma_J) out["sigma_J"] = matrix_json(*p.sigma_J);
  return out;
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  Json raw;
  try {
    raw = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
  return validate_params(raw);
}

RiskCoefficient risk_coefficient(double theta) {
  if (!(theta < 1.0))
    throw Error(ErrorCode::BadTheta, "theta must be < 1");
  if (theta == 0.0) return {0.0};
  const double gap = 1.0 - theta;
  return {theta / (2.0 * gap * gap)};
}

Matrix stationary_drift_covariance(const Matrix& kappa, const Matrix& sigma_mu) {
  if (!all_eigen_real_parts_positive(kappa))
    throw Error(ErrorCode::UnstableKappa, "kappa has an eigenvalue with real part <= 0");
  return solve_lyapunov(kappa, sigma_mu * sigma_mu.transpose());
}

}  // namespace driftbound
