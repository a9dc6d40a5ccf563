#include "reglsl/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "reglsl/error.hpp"

namespace reglsl::numerics {

namespace {

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(std::string(who) + ": expected a nonempty square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace

void fix_sign(Eigen::Ref<Vector> v) {
  // "Nonzero" relative to the largest entry so that roundoff-level entries
  // never decide the sign.
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-10 * scale) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

SymEigDecomposition sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  const Matrix sym = symmetrized(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw SingularError("sym_eig: eigensolver did not converge");
  }
  const Eigen::Index n = sym.rows();
  // Eigen returns ascending order; reverse with a stable sort so that ties
  // keep the order in which they were computed.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.rbegin(), order.rend(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return solver.eigenvalues()[i] > solver.eigenvalues()[j];
  });

  SymEigDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = solver.eigenvalues()[order[static_cast<std::size_t>(k)]];
    out.eigenvectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    fix_sign(out.eigenvectors.col(k));
  }
  return out;
}

Vector truncated_pinv_solve(const Matrix& a, const Vector& rhs, double rel_threshold) {
  if (rhs.size() != a.rows()) {
    throw DimensionError("truncated_pinv_solve: rhs has " + std::to_string(rhs.size()) +
                         " entries, matrix has " + std::to_string(a.rows()) + " rows");
  }
  if (!(rel_threshold >= 0.0 && rel_threshold < 1.0)) {
    throw DimensionError("truncated_pinv_solve: threshold must lie in [0,1)");
  }
  Vector x = Vector::Zero(a.cols());
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) return x;

  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cut = rel_threshold * sv[0];
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] <= 0.0 || sv[i] < cut) break;
    const double coef = svd.matrixU().col(i).dot(rhs) / sv[i];
    x.noalias() += coef * svd.matrixV().col(i);
  }
  return x;
}

Matrix inv_sqrt_spd(const Matrix& g) {
  const SymEigDecomposition eig = sym_eig(g);
  const double smallest = eig.eigenvalues[eig.eigenvalues.size() - 1];
  if (!(smallest > 0.0)) {
    throw BreakdownError("inv_sqrt_spd: matrix is not positive definite (smallest eigenvalue " +
                             std::to_string(smallest) + ")",
                         smallest);
  }
  const Vector scale = eig.eigenvalues.cwiseSqrt().cwiseInverse();
  return eig.eigenvectors * scale.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix sqrt_spd(const Matrix& g) {
  const SymEigDecomposition eig = sym_eig(g);
  const double smallest = eig.eigenvalues[eig.eigenvalues.size() - 1];
  if (!(smallest > 0.0)) {
    throw BreakdownError("sqrt_spd: matrix is not positive definite", smallest);
  }
  return eig.eigenvectors * eig.eigenvalues.cwiseSqrt().asDiagonal() *
         eig.eigenvectors.transpose();
}

double relative_asymmetry(const Matrix& a) {
  require_square(a, "relative_asymmetry");
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace reglsl::numerics
