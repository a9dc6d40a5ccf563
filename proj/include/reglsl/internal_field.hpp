#pragma once

#include <string_view>
#include <vector>

#include "reglsl/forward_model.hpp"

namespace reglsl {

enum class Provenance { true_field, background, data_generated };

std::string_view to_string(Provenance p);

/// Grid-sampled fields, one column per (lambda_j, source r) at index j*K + r.
struct SnapshotMatrix {
  GridSpec grid;
  Matrix values;  // grid.size() x mK
  std::vector<double> lambdas;
  int block = 1;
  Provenance provenance = Provenance::background;

  /// N x K slab for spectral point j.
  Matrix at(int j) const { return values.middleCols(Eigen::Index{j} * block, block); }
};

/// Exact discrete background solutions (p = 0 or n = 1).
SnapshotMatrix background_basis(const GridSpec& grid, EquationKind kind,
                                const std::vector<double>& lambdas, const SourceSet& sources);

/// Exact solutions for an arbitrary medium; used for diagnostics and oracles.
SnapshotMatrix true_snapshots(const GridSpec& grid, const CoefficientField& field,
                              const std::vector<double>& lambdas, const SourceSet& sources);

/// Data-generated internal solutions  U = V0 Z Q0 (Q^T M~) Z^T, where Q^T M~
/// is the inverse of the M~-orthonormal Lanczos basis Q.
SnapshotMatrix data_internal_solutions(const SnapshotMatrix& background, const Matrix& basis_z,
                                       const Matrix& q_background, const Matrix& q_measured,
                                       const Matrix& mass_measured);

/// u(lambda) ~ sqrt(b~^T M~^{-1} b~) * basis * (T + lambda I)^{-1} e1, with
/// `basis` = V0 Z Q0 and T, b~, M~ from the measured ROM.
Vector siso_internal_at(double lambda, const Matrix& basis, const Matrix& tridiagonal,
                        const Vector& rhs, const Matrix& mass);

/// d/dlambda of siso_internal_at: -sqrt(b~^T M~^{-1} b~) * basis * (T + lambda I)^{-2} e1.
Vector siso_internal_derivative_at(double lambda, const Matrix& basis, const Matrix& tridiagonal,
                                   const Vector& rhs, const Matrix& mass);

/// ||V0 - V0 Z Z^T|| / ||V0|| (Frobenius); quality of the truncation projector.
double projector_defect(const SnapshotMatrix& background, const Matrix& basis_z);

}  // namespace reglsl
