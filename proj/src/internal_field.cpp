#include "reglsl/internal_field.hpp"

#include <cmath>

#include "reglsl/error.hpp"

namespace reglsl {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::true_field:
      return "true";
    case Provenance::background:
      return "background";
    case Provenance::data_generated:
      return "data_generated";
  }
  return "unknown";
}

SnapshotMatrix true_snapshots(const GridSpec& grid, const CoefficientField& field,
                              const std::vector<double>& lambdas, const SourceSet& sources) {
  const DiscreteOperator op = assemble_operator(grid, field);
  SnapshotMatrix out;
  out.grid = grid;
  out.values = solve_snapshots(op, lambdas, sources);
  out.lambdas = lambdas;
  out.block = sources.count();
  out.provenance = Provenance::true_field;
  return out;
}

SnapshotMatrix background_basis(const GridSpec& grid, EquationKind kind,
                                const std::vector<double>& lambdas, const SourceSet& sources) {
  SnapshotMatrix out =
      true_snapshots(grid, CoefficientField::background(grid, kind), lambdas, sources);
  out.provenance = Provenance::background;
  return out;
}

SnapshotMatrix data_internal_solutions(const SnapshotMatrix& background, const Matrix& basis_z,
                                       const Matrix& q_background, const Matrix& q_measured,
                                       const Matrix& mass_measured) {
  const Eigen::Index l = basis_z.cols();
  if (basis_z.rows() != background.values.cols() || q_background.rows() != l ||
      q_measured.rows() != l || q_background.cols() != q_measured.cols() ||
      mass_measured.rows() != l || mass_measured.cols() != l) {
    throw DimensionError("data_internal_solutions: inconsistent V0, Z, Q0, Q, M~ shapes");
  }
  // Q^{-1} = Q^T M~ by M~-orthonormality.
  const Matrix q_inverse = q_measured.transpose() * mass_measured;
  const Matrix mixing = basis_z * (q_background * (q_inverse * basis_z.transpose()));
  SnapshotMatrix out = background;
  out.values = background.values * mixing;
  out.provenance = Provenance::data_generated;
  return out;
}

namespace {

struct ShiftedCoefficients {
  Vector first;   // (T + lambda I)^{-1} e1
  double scale;   // sqrt(b^T M^{-1} b)
  Eigen::PartialPivLU<Matrix> lu;
};

ShiftedCoefficients shifted_coefficients(double lambda, const Matrix& basis,
                                         const Matrix& tridiagonal, const Vector& rhs,
                                         const Matrix& mass) {
  const Eigen::Index l = tridiagonal.rows();
  if (basis.cols() != l || rhs.size() != mass.rows() || mass.rows() != mass.cols()) {
    throw DimensionError("siso_internal_at: inconsistent basis, T, b~, M~ shapes");
  }
  const double norm2 = rhs.dot(mass.llt().solve(rhs));
  if (!(norm2 > 0.0)) throw BreakdownError("siso_internal_at: b^T M^{-1} b <= 0", norm2);
  const Matrix shifted = tridiagonal + lambda * Matrix::Identity(l, l);
  ShiftedCoefficients c{Vector::Zero(l), std::sqrt(norm2), Eigen::PartialPivLU<Matrix>(shifted)};
  if (!(c.lu.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0)) {
    throw SingularError("siso_internal_at: T + lambda I is singular");
  }
  c.first = c.lu.solve(Vector::Unit(l, 0));
  return c;
}

}  // namespace

Vector siso_internal_at(double lambda, const Matrix& basis, const Matrix& tridiagonal,
                        const Vector& rhs, const Matrix& mass) {
  const auto c = shifted_coefficients(lambda, basis, tridiagonal, rhs, mass);
  return c.scale * (basis * c.first);
}

Vector siso_internal_derivative_at(double lambda, const Matrix& basis, const Matrix& tridiagonal,
                                   const Vector& rhs, const Matrix& mass) {
  const auto c = shifted_coefficients(lambda, basis, tridiagonal, rhs, mass);
  const Vector second = c.lu.solve(c.first);
  return -c.scale * (basis * second);
}

double projector_defect(const SnapshotMatrix& background, const Matrix& basis_z) {
  const double norm = background.values.norm();
  if (norm == 0.0) return 0.0;
  const Matrix projected = background.values * basis_z * basis_z.transpose();
  return (background.values - projected).norm() / norm;
}

}  // namespace reglsl
