#pragma once

// Small dense helpers shared by the modules. Matrices here are tiny (d is the
// number of risky assets), so clarity wins over blocking or fixed sizes.

#include <Eigen/Dense>

namespace driftbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Relative asymmetry ‖M − Mᵀ‖_F / max(‖M‖_F, tiny).
double asymmetry(const Matrix& m);

/// Eigenvalues of the symmetric part of `m`, ascending.
Vector sym_eigenvalues(const Matrix& m);

double lambda_min_sym(const Matrix& m);
double lambda_max_sym(const Matrix& m);

/// Symmetric PSD square root; negative eigenvalues (round-off) are clipped.
Matrix psd_sqrt(const Matrix& m);

/// Clips eigenvalues in [floor, 0) to zero. Returns false (leaving `m`
/// untouched) when some eigenvalue lies below `floor`.
bool project_psd(Matrix& m, double floor);

/// Solves K X + X Kᵀ = S by Kronecker vectorisation. Requires that no two
/// eigenvalues of K sum to zero (true when K is stable).
Matrix solve_lyapunov(const Matrix& k, const Matrix& s);

/// True if every eigenvalue of `m` has real part > 0.
bool all_eigen_real_parts_positive(const Matrix& m);
double min_eigen_real_part(const Matrix& m);

/// Matrix exponential (Padé, via Eigen's unsupported MatrixFunctions).
Matrix expm(const Matrix& m);

}  // namespace driftbound
