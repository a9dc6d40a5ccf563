#pragma once

#include <vector>

#include "reglsl/forward_model.hpp"

namespace reglsl {

/// Data-driven Galerkin ROM (S + lambda M) C = B. Row/column index of the
/// mK x mK matrices is j*K + r (spectral point major).
struct RomMatrices {
  Matrix mass;       // M
  Matrix stiffness;  // S
  Matrix rhs;        // B, mK x K
  std::vector<double> lambdas;
  int block = 1;
  EquationKind kind = EquationKind::schrodinger;
  /// Relative asymmetry of M and S before symmetrization.
  double mass_asymmetry = 0.0;
  double stiffness_asymmetry = 0.0;

  Eigen::Index order() const { return mass.rows(); }
};

/// Loewner-type divided differences:
///   M_ij = (F_i - F_j) / (lambda_j - lambda_i),  M_ii = -F'_i
///   S_ij = (lambda_j F_j - lambda_i F_i) / (lambda_j - lambda_i),  S_ii = F_i + lambda_i F'_i
///   B_i  = F_i
/// Both M and S are symmetrized. Throws SingularError on repeated points.
RomMatrices build_rom(const TransferDataset& data);

/// B^T (S + lambda M)^{-1} B.
Matrix rom_transfer(const RomMatrices& rom, double lambda);

struct RomHealth {
  double mass_min = 0.0;
  double mass_max = 0.0;
  double stiffness_min = 0.0;
  double stiffness_max = 0.0;
  int nonpositive_mass = 0;
  double mass_asymmetry = 0.0;
  double stiffness_asymmetry = 0.0;
};

RomHealth rom_health(const RomMatrices& rom);

}  // namespace reglsl
