#include "driftbound/linalg.hpp"

#include <algorithm>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace driftbound {

double asymmetry(const Matrix& m) {
  const double scale = std::max(m.norm(), std::numeric_limits<double>::min());
  return (m - m.transpose()).norm() / scale;
}

Vector sym_eigenvalues(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double lambda_min_sym(const Matrix& m) { return sym_eigenvalues(m).minCoeff(); }

double lambda_max_sym(const Matrix& m) { return sym_eigenvalues(m).maxCoeff(); }

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

bool project_psd(Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() < floor) return false;
  if (ev.minCoeff() >= 0.0) {
    m = symmetrized(m);
    return true;
  }
  m = es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() *
      es.eigenvectors().transpose();
  m = symmetrized(m);
  return true;
}

Matrix solve_lyapunov(const Matrix& k, const Matrix& s) {
  const Eigen::Index n = k.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix op = Matrix::Zero(n * n, n * n);
  // vec(K X) = (I ⊗ K) vec X, vec(X Kᵀ) = (K ⊗ I) vec X (column-major vec).
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      op.block(i * n, j * n, n, n) += id(i, j) * k;
      op.block(i * n, j * n, n, n) += k(i, j) * id;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(s.data(), n * n);
  const Vector x = op.partialPivLu().solve(rhs);
  return symmetrized(Eigen::Map<const Matrix>(x.data(), n, n));
}

double min_eigen_real_part(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().real().minCoeff();
}

bool all_eigen_real_parts_positive(const Matrix& m) {
  return min_eigen_real_part(m) > 0.0;
}

Matrix expm(const Matrix& m) { return m.exp(); }

}  // namespace driftbound
