#include "reglsl/rom.hpp"

#include <limits>
#include <string>

#include "reglsl/error.hpp"
#include "reglsl/numerics.hpp"

namespace reglsl {

RomMatrices build_rom(const TransferDataset& data) {
  data.validate();
  const int m = data.points();
  const int k = data.block_size();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (data.lambdas[static_cast<std::size_t>(i)] == data.lambdas[static_cast<std::size_t>(j)]) {
        throw SingularError("build_rom: repeated spectral point " +
                            std::to_string(data.lambdas[static_cast<std::size_t>(i)]));
      }
    }
  }

  RomMatrices rom;
  rom.lambdas = data.lambdas;
  rom.block = k;
  rom.kind = data.kind;
  rom.mass.resize(m * k, m * k);
  rom.stiffness.resize(m * k, m * k);
  rom.rhs.resize(m * k, k);

  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double li = data.lambdas[ui];
    const Matrix& fi = data.values[ui];
    rom.rhs.middleRows(i * k, k) = fi;
    for (int j = 0; j < m; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (i == j) {
        rom.mass.block(i * k, i * k, k, k) = -data.derivatives[ui];
        rom.stiffness.block(i * k, i * k, k, k) = fi + li * data.derivatives[ui];
        continue;
      }
      const double lj = data.lambdas[uj];
      const Matrix& fj = data.values[uj];
      const double denom = lj - li;
      rom.mass.block(i * k, j * k, k, k) = (fi - fj) / denom;
      rom.stiffness.block(i * k, j * k, k, k) = (lj * fj - li * fi) / denom;
    }
  }
  rom.mass_asymmetry = numerics::relative_asymmetry(rom.mass);
  rom.stiffness_asymmetry = numerics::relative_asymmetry(rom.stiffness);
  rom.mass = numerics::symmetrized(rom.mass);
  rom.stiffness = numerics::symmetrized(rom.stiffness);
  return rom;
}

Matrix rom_transfer(const RomMatrices& rom, double lambda) {
  const Matrix pencil = rom.stiffness + lambda * rom.mass;
  Eigen::FullPivLU<Matrix> lu(pencil);
  // Only an exactly zero pivot counts as singular; data-driven pencils are
  // legitimately ill-conditioned.
  lu.setThreshold(std::numeric_limits<double>::min());
  if (!lu.isInvertible()) {
    throw SingularError("rom_transfer: S + lambda M is singular at lambda = " +
                        std::to_string(lambda));
  }
  return rom.rhs.transpose() * lu.solve(rom.rhs);
}

RomHealth rom_health(const RomMatrices& rom) {
  RomHealth health;
  const Vector mass_eigs = numerics::sym_eig(rom.mass).eigenvalues;
  const Vector stiff_eigs = numerics::sym_eig(rom.stiffness).eigenvalues;
  health.mass_max = mass_eigs[0];
  health.mass_min = mass_eigs[mass_eigs.size() - 1];
  health.stiffness_max = stiff_eigs[0];
  health.stiffness_min = stiff_eigs[stiff_eigs.size() - 1];
  health.nonpositive_mass = static_cast<int>((mass_eigs.array() <= 0.0).count());
  health.mass_asymmetry = rom.mass_asymmetry;
  health.stiffness_asymmetry = rom.stiffness_asymmetry;
  return health;
}

}  // namespace reglsl
