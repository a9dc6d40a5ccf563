#pragma once

#include <string_view>
#include <vector>

#include "reglsl/rom.hpp"

namespace reglsl {

/// How the Gramian threshold alpha is compared against eigenvalues of M.
enum class ThresholdMode {
  absolute,  // keep sigma_k >= alpha
  relative,  // keep sigma_k >= alpha * sigma_max
};

std::string_view to_string(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view text);

/// ROM projected onto dominant eigenvectors Z of the (measured) mass matrix:
/// M~ = Z^T M Z, S~ = Z^T S Z, B~ = Z^T B.
struct TruncatedRom {
  Matrix basis;   // Z, mK x l
  Vector sigma;   // retained eigenvalues of the measured M, descending
  Matrix mass;    // l x l
  Matrix stiffness;
  Matrix rhs;     // l x K
  double alpha = 0.0;
  ThresholdMode mode = ThresholdMode::absolute;
  std::vector<double> lambdas;
  int block = 1;
  EquationKind kind = EquationKind::schrodinger;

  Eigen::Index order() const { return basis.cols(); }
};

/// Keeps the positive eigenpairs of M with sigma >= alpha (scaled by
/// sigma_max in relative mode). M~ = Z^T M Z, diagonal up to rounding. Throws
/// EmptyModelError when nothing survives.
TruncatedRom truncate_gramian(const RomMatrices& rom, double alpha,
                              ThresholdMode mode = ThresholdMode::absolute);

/// Projects another ROM (the background) onto the basis of `reference`.
/// Throws BreakdownError when the projected mass matrix is not SPD.
TruncatedRom project_onto(const RomMatrices& rom, const TruncatedRom& reference);

/// B~^T (S~ + lambda M~)^{-1} B~.
Matrix truncated_transfer(const TruncatedRom& rom, double lambda);

}  // namespace reglsl
