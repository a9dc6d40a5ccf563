#include "reglsl/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reglsl/error.hpp"
#include "reglsl/numerics.hpp"

namespace reglsl {

namespace {

constexpr double kBreakdownTolerance = 1e-12;

void check_pencil(const Matrix& mass, const Matrix& stiffness, Eigen::Index rhs_rows) {
  if (mass.rows() != mass.cols() || stiffness.rows() != stiffness.cols() ||
      mass.rows() != stiffness.rows() || rhs_rows != mass.rows() || mass.rows() == 0) {
    throw DimensionError("lanczos: inconsistent M, S, B shapes");
  }
}

Eigen::LLT<Matrix> factor_mass(const Matrix& mass) {
  Eigen::LLT<Matrix> llt(numerics::symmetrized(mass));
  if (llt.info() != Eigen::Success) {
    const double smallest = numerics::sym_eig(mass).eigenvalues.minCoeff();
    throw BreakdownError("lanczos: mass matrix is not positive definite", smallest, 0);
  }
  return llt;
}

/// Removes the M-components of `w` along the columns of `q`, twice.
void reorthogonalize(Matrix& w, const Matrix& q, const Matrix& mass) {
  if (q.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w -= q * (q.transpose() * (mass * w));
}

/// Euclidean version, classical Gram-Schmidt applied twice.
void reorthogonalize(Matrix& w, const Matrix& q) {
  if (q.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w -= q * (q.transpose() * w);
}

/// The pencil in coordinates whitened by M = L L^T: A = L^{-1} S L^{-T},
/// rhs = L^{-1} B. Lanczos runs there with the Euclidean inner product and the
/// basis maps back through Q = L^{-T} Q_hat, so that Q^T M Q = Q_hat^T Q_hat.
struct Whitened {
  Eigen::LLT<Matrix> llt;
  Matrix op;
  Matrix rhs;

  Matrix unwhiten(const Matrix& q_hat) const { return llt.matrixU().solve(q_hat); }
};

Whitened whiten(const Matrix& mass, const Matrix& stiffness, const Matrix& rhs) {
  Whitened w{factor_mass(mass), {}, {}};
  const auto l = w.llt.matrixL();
  const Matrix half = l.solve(numerics::symmetrized(stiffness));
  w.op = numerics::symmetrized(l.solve(half.transpose()));
  w.rhs = l.solve(rhs);
  return w;
}

}  // namespace

LanczosFactors m_symmetric_lanczos(const Matrix& mass, const Matrix& stiffness, const Vector& rhs) {
  check_pencil(mass, stiffness, rhs.size());
  const Eigen::Index l = mass.rows();
  const Whitened wh = whiten(mass, stiffness, rhs);

  const double start_norm = wh.rhs.col(0).norm();
  if (!(start_norm > 0.0)) {
    throw BreakdownError("lanczos: b^T M^{-1} b is not positive", start_norm, 0);
  }

  LanczosFactors out;
  out.start_scale = Matrix::Constant(1, 1, start_norm);
  Matrix q(l, l);
  q.col(0) = wh.rhs.col(0) / start_norm;
  std::vector<double> alpha;
  std::vector<double> beta;
  double t_norm = 0.0;

  Eigen::Index k = 0;
  for (;; ++k) {
    Matrix w = wh.op * q.col(k);
    alpha.push_back(q.col(k).dot(w.col(0)));
    w.col(0) -= alpha.back() * q.col(k);
    if (k > 0) w.col(0) -= beta.back() * q.col(k - 1);
    reorthogonalize(w, q.leftCols(k + 1));
    t_norm = std::max(t_norm, std::abs(alpha.back()) + (beta.empty() ? 0.0 : beta.back()));
    if (k + 1 == l) break;

    const double b = w.col(0).norm();
    if (!(b > kBreakdownTolerance * t_norm)) {
      out.breakdown = true;
      break;
    }
    beta.push_back(b);
    q.col(k + 1) = w.col(0) / b;
  }

  const Eigen::Index steps = k + 1;
  out.basis = wh.unwhiten(q.leftCols(steps));
  out.tridiagonal = Matrix::Zero(steps, steps);
  for (Eigen::Index i = 0; i < steps; ++i) {
    out.tridiagonal(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < steps) {
      out.tridiagonal(i, i + 1) = out.tridiagonal(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
  }
  out.widths.assign(static_cast<std::size_t>(steps), 1);
  return out;
}

LanczosFactors block_lanczos(const Matrix& mass, const Matrix& stiffness, const Matrix& rhs) {
  check_pencil(mass, stiffness, rhs.rows());
  const Eigen::Index l = mass.rows();
  const Whitened wh = whiten(mass, stiffness, rhs);

  LanczosFactors out;
  Matrix q(l, 0);
  std::vector<Matrix> diagonal;
  std::vector<Matrix> lower;  // lower[k] = Q_{k+1}^T W_k
  double t_norm = 0.0;

  // Full-width blocks use the polar factor W (W^T W)^{-1/2}. A final block
  // narrower than `w` takes the polar factor of its leading columns: unlike
  // Gram eigenvectors this choice moves continuously with the data, so the
  // measured and background bases stay aligned.
  const auto normalize = [&](const Matrix& w, int step) -> Matrix {
    const Eigen::Index remaining = l - q.cols();
    const Matrix gram = numerics::symmetrized(w.transpose() * w);
    const Eigen::Index width = std::min<Eigen::Index>(remaining, w.cols());
    const Matrix lead = numerics::symmetrized(gram.topLeftCorner(width, width));
    const double smallest = numerics::sym_eig(lead).eigenvalues[width - 1];
    const double floor_value = kBreakdownTolerance * std::max(t_norm, 1e-300);
    if (!(smallest > 0.0) || std::sqrt(smallest) <= floor_value) {
      throw BreakdownError("block_lanczos: normalization block lost rank at step " +
                               std::to_string(step) + " (Gram eigenvalue " +
                               std::to_string(smallest) + ")",
                           smallest, step);
    }
    // Second pass: rounding in an ill-conditioned Gram factor leaves
    // components along earlier blocks; the re-normalization is near identity.
    Matrix block = w.leftCols(width) * numerics::inv_sqrt_spd(lead);
    reorthogonalize(block, q);
    return block * numerics::inv_sqrt_spd(numerics::symmetrized(block.transpose() * block));
  };

  const Matrix start_gram = numerics::symmetrized(wh.rhs.transpose() * wh.rhs);
  {
    const double smallest = numerics::sym_eig(start_gram).eigenvalues.minCoeff();
    if (!(smallest > 0.0)) {
      throw BreakdownError("block_lanczos: B^T M^{-1} B is not positive definite", smallest, 0);
    }
  }
  out.start_scale = numerics::sqrt_spd(start_gram);
  Matrix block = normalize(wh.rhs, 0);

  for (int step = 0;; ++step) {
    const Eigen::Index offset = q.cols();
    q.conservativeResize(l, offset + block.cols());
    q.rightCols(block.cols()) = block;
    out.widths.push_back(static_cast<int>(block.cols()));

    Matrix w = wh.op * block;
    diagonal.push_back(numerics::symmetrized(block.transpose() * w));
    w -= block * diagonal.back();
    if (!lower.empty()) {
      const Matrix& prev = q.middleCols(offset - lower.back().cols(), lower.back().cols());
      w -= prev * lower.back().transpose();
    }
    reorthogonalize(w, q);
    t_norm = std::max(t_norm, diagonal.back().norm() + (lower.empty() ? 0.0 : lower.back().norm()));
    if (q.cols() == l) break;

    const Matrix next = normalize(w, step + 1);
    lower.push_back(next.transpose() * w);
    block = next;
  }

  out.basis = wh.unwhiten(q);
  out.tridiagonal = Matrix::Zero(l, l);
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < diagonal.size(); ++k) {
    const Eigen::Index wk = out.widths[k];
    out.tridiagonal.block(offset, offset, wk, wk) = diagonal[k];
    if (k < lower.size()) {
      const Eigen::Index wn = out.widths[k + 1];
      out.tridiagonal.block(offset + wk, offset, wn, wk) = lower[k];
      out.tridiagonal.block(offset, offset + wk, wk, wn) = lower[k].transpose();
    }
    offset += wk;
  }
  return out;
}

Vector pencil_eigenvalues(const Matrix& mass, const Matrix& stiffness) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(numerics::symmetrized(stiffness),
                                                          numerics::symmetrized(mass));
  if (solver.info() != Eigen::Success) {
    throw SingularError("pencil_eigenvalues: generalized eigensolver failed");
  }
  return solver.eigenvalues().reverse();
}

double stable_time_step(const Matrix& mass, const Matrix& stiffness) {
  const double theta_max = pencil_eigenvalues(mass, stiffness)[0];
  if (!(theta_max > 0.0)) return 1.0;
  return 1.0 / std::sqrt(theta_max);
}

double krylov_equivalence_check(const Matrix& mass, const Matrix& stiffness, const Vector& rhs,
                                double tau, int steps) {
  check_pencil(mass, stiffness, rhs.size());
  if (!(tau > 0.0)) throw DimensionError("krylov_equivalence_check: tau must be positive");
  if (steps < 1 || steps > mass.rows()) {
    throw DimensionError("krylov_equivalence_check: steps must lie in [1, l]");
  }
  const auto llt = factor_mass(mass);
  const auto apply_a = [&](const Vector& v) -> Vector { return llt.solve(stiffness * v); };

  // Time snapshots of the ROM wave equation.
  std::vector<Vector> snapshots;
  snapshots.push_back(llt.solve(rhs));
  if (steps > 1) snapshots.push_back(snapshots[0] - 0.5 * tau * tau * apply_a(snapshots[0]));
  for (int i = 1; i + 1 < steps; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    snapshots.push_back(2.0 * snapshots[ui] - tau * tau * apply_a(snapshots[ui]) -
                        snapshots[ui - 1]);
  }

  // Sequential M-Gram-Schmidt.
  Matrix gs(mass.rows(), steps);
  for (int i = 0; i < steps; ++i) {
    Matrix v = snapshots[static_cast<std::size_t>(i)];
    const double raw = std::sqrt(std::max(0.0, v.col(0).dot(mass * v.col(0))));
    reorthogonalize(v, gs.leftCols(i), mass);
    const double norm = std::sqrt(std::max(0.0, v.col(0).dot(mass * v.col(0))));
    if (!(norm > 1e-14 * raw)) return 1.0;
    gs.col(i) = v.col(0) / norm;
  }

  const LanczosFactors lanczos = m_symmetric_lanczos(mass, stiffness, rhs);
  if (lanczos.basis.cols() < steps) return 1.0;

  double worst = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const auto x = gs.leftCols(k);
    const auto y = lanczos.basis.leftCols(k);
    const Matrix residual = x - y * (y.transpose() * mass * x);
    const Matrix gram = numerics::symmetrized(residual.transpose() * mass * residual);
    const double sine = std::sqrt(std::max(0.0, numerics::sym_eig(gram).eigenvalues[0]));
    worst = std::max(worst, std::asin(std::min(1.0, sine)));
  }
  return worst;
}

}  // namespace reglsl
