#include "reglsl/regularizer.hpp"

#include <string>

#include "reglsl/error.hpp"
#include "reglsl/io.hpp"
#include "reglsl/numerics.hpp"

namespace reglsl {

std::string_view to_string(ThresholdMode mode) {
  return mode == ThresholdMode::absolute ? "absolute" : "relative";
}

ThresholdMode parse_threshold_mode(std::string_view text) {
  if (text == "absolute") return ThresholdMode::absolute;
  if (text == "relative") return ThresholdMode::relative;
  throw ParseError("unknown threshold mode '" + std::string(text) + "'");
}

namespace {

/// Z^T X Z, shared by both ROMs so identical inputs project bitwise alike.
Matrix project(const Matrix& z, const Matrix& x) {
  return numerics::symmetrized(z.transpose() * x * z);
}

}  // namespace

TruncatedRom truncate_gramian(const RomMatrices& rom, double alpha, ThresholdMode mode) {
  if (!(alpha > 0.0)) throw ConfigError("truncate_gramian: alpha must be positive");
  const numerics::SymEigDecomposition eig = numerics::sym_eig(rom.mass);
  const double sigma_max = eig.eigenvalues[0];
  const double cut = mode == ThresholdMode::absolute ? alpha : alpha * sigma_max;

  Eigen::Index kept = 0;
  while (kept < eig.eigenvalues.size() && eig.eigenvalues[kept] > 0.0 &&
         eig.eigenvalues[kept] >= cut) {
    ++kept;
  }
  if (kept == 0) {
    throw EmptyModelError("truncate_gramian: no eigenvalue of M reaches the threshold " +
                              std::to_string(cut) + " (sigma_max = " +
                              std::to_string(sigma_max) + ")",
                          sigma_max);
  }

  TruncatedRom out;
  out.basis = eig.eigenvectors.leftCols(kept);
  out.sigma = eig.eigenvalues.head(kept);
  // Z^T M Z rather than diag(sigma): equal up to rounding, and a background
  // ROM built from the same data then projects to exactly this matrix.
  out.mass = project(out.basis, rom.mass);
  out.stiffness = project(out.basis, rom.stiffness);
  out.rhs = out.basis.transpose() * rom.rhs;
  out.alpha = alpha;
  out.mode = mode;
  out.lambdas = rom.lambdas;
  out.block = rom.block;
  out.kind = rom.kind;
  return out;
}

TruncatedRom project_onto(const RomMatrices& rom, const TruncatedRom& reference) {
  if (rom.order() != reference.basis.rows() || rom.block != reference.block) {
    throw DimensionError("project_onto: ROM shape does not match the truncation basis");
  }
  TruncatedRom out = reference;
  const Matrix& z = reference.basis;
  out.mass = project(z, rom.mass);
  out.stiffness = project(z, rom.stiffness);
  out.rhs = z.transpose() * rom.rhs;
  out.kind = rom.kind;
  const double smallest = numerics::sym_eig(out.mass).eigenvalues.minCoeff();
  if (!(smallest > 0.0)) {
    throw BreakdownError("project_onto: projected mass matrix is not positive definite "
                         "(smallest eigenvalue " + format_double(smallest) + ")",
                         smallest);
  }
  return out;
}

Matrix truncated_transfer(const TruncatedRom& rom, double lambda) {
  const Matrix pencil = rom.stiffness + lambda * rom.mass;
  return rom.rhs.transpose() * pencil.fullPivLu().solve(rom.rhs);
}

}  // namespace reglsl
