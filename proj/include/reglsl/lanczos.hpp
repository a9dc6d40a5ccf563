#pragma once

#include <vector>

#include "reglsl/forward_model.hpp"

namespace reglsl {

/// M-orthonormal Lanczos basis Q (Q^T M Q = I) and the (block-)tridiagonal
/// T = Q^T S Q of A = M^{-1} S.
struct LanczosFactors {
  Matrix basis;             // Q, l x steps-worth of columns
  Matrix tridiagonal;       // T
  std::vector<int> widths;  // column count of each Lanczos block
  Matrix start_scale;       // (B^T M^{-1} B)^{1/2}; 1x1 sqrt(b^T M^{-1} b) in the scalar case
  bool breakdown = false;   // scalar recurrence stopped early

  int steps() const { return static_cast<int>(widths.size()); }
};

/// Scalar M-symmetric Lanczos with full reorthogonalization (classical
/// Gram-Schmidt applied twice). Off-diagonal coefficients are nonnegative.
/// On breakdown the factors are truncated at that step and `breakdown` is set.
LanczosFactors m_symmetric_lanczos(const Matrix& mass, const Matrix& stiffness, const Vector& rhs);

/// Block M-symmetric Lanczos. Each block is normalized with the symmetric
/// (polar) inverse square root of its M-Gram matrix, so the normalization
/// factors are SPD. When fewer than K dimensions remain, the last block is the
/// polar factor of its leading columns. Throws BreakdownError (with the step
/// index) if a normalization Gram matrix loses rank.
LanczosFactors block_lanczos(const Matrix& mass, const Matrix& stiffness, const Matrix& rhs);

/// Time step at which tau^2 * theta_max / 2 = 1/2 for the largest generalized
/// eigenvalue theta_max of (S, M).
double stable_time_step(const Matrix& mass, const Matrix& stiffness);

/// Runs the ROM cosine recurrence d[(i+1)tau] = (2I - tau^2 A) d[i tau] - d[(i-1)tau]
/// with d(0) = M^{-1} b and d(tau) = d(-tau), applies sequential M-Gram-Schmidt
/// to the snapshots and returns the largest principal angle (radians) between
/// the first k Gram-Schmidt and first k Lanczos vectors over k = 1..steps.
/// A Gram-Schmidt breakdown is reported as 1.
double krylov_equivalence_check(const Matrix& mass, const Matrix& stiffness, const Vector& rhs,
                                double tau, int steps);

/// Generalized eigenvalues of the symmetric pencil (S, M), M SPD, descending.
Vector pencil_eigenvalues(const Matrix& mass, const Matrix& stiffness);

}  // namespace reglsl
