#pragma once

#include <Eigen/Dense>

namespace reglsl::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
/// Each eigenvector has its first nonzero component positive.
struct SymEigDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Symmetric eigendecomposition of (A + A^T)/2. Throws DimensionError for
/// non-square input.
SymEigDecomposition sym_eig(const Matrix& a);

/// Minimal-norm least-squares solution of A x = rhs keeping only singular
/// triplets with sigma_i >= rel_threshold * sigma_max. A = 0 yields x = 0.
Vector truncated_pinv_solve(const Matrix& a, const Vector& rhs, double rel_threshold);

/// Symmetric inverse square root G^{-1/2}. Throws BreakdownError carrying the
/// smallest eigenvalue if G is not positive definite.
Matrix inv_sqrt_spd(const Matrix& g);

/// Symmetric square root G^{1/2} of an SPD matrix.
Matrix sqrt_spd(const Matrix& g);

/// Relative asymmetry ||A - A^T||_max / ||A||_max (0 for the zero matrix).
double relative_asymmetry(const Matrix& a);

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Flip the sign of `v` so that its first nonzero entry is positive.
void fix_sign(Eigen::Ref<Vector> v);

}  // namespace reglsl::numerics
