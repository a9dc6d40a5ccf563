#include "reglsl/lsl.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "reglsl/error.hpp"
#include "reglsl/kernels.hpp"
#include "reglsl/numerics.hpp"

namespace reglsl {

std::string_view to_string(InversionMode mode) {
  switch (mode) {
    case InversionMode::born:
      return "born";
    case InversionMode::lsl:
      return "lsl";
    case InversionMode::reg_lsl:
      return "reg_lsl";
  }
  return "unknown";
}

InversionMode parse_inversion_mode(std::string_view text) {
  if (text == "born") return InversionMode::born;
  if (text == "lsl") return InversionMode::lsl;
  if (text == "reg_lsl") return InversionMode::reg_lsl;
  throw ParseError("unknown inversion mode '" + std::string(text) + "'");
}

LslSystem assemble_system(const SnapshotMatrix& background, const SnapshotMatrix* internal,
                          const TransferDataset& data, const TransferDataset& data0,
                          InversionMode mode, EquationKind kind,
                          const DerivativeSnapshots* derivatives) {
  data.validate();
  data0.validate();
  if (data.lambdas != data0.lambdas || data.block_size() != data0.block_size()) {
    throw DimensionError("assemble_system: measured and background data disagree on lambda/K");
  }
  const int m = data.points();
  const int k = data.block_size();
  if (background.block != k || background.values.cols() != Eigen::Index{m} * k ||
      background.values.rows() != background.grid.size()) {
    throw DimensionError("assemble_system: background snapshots do not match the data");
  }
  const SnapshotMatrix* right = &background;
  if (mode != InversionMode::born) {
    if (internal == nullptr) throw ConfigError("assemble_system: internal solutions required");
    if (internal->values.rows() != background.values.rows() ||
        internal->values.cols() != background.values.cols()) {
      throw DimensionError("assemble_system: internal solutions do not match the background");
    }
    right = internal;
  }
  const bool derivative_rows = mode == InversionMode::lsl && k == 1;
  if (derivatives != nullptr && !derivative_rows) {
    throw ConfigError("assemble_system: derivative rows exist only for plain LSL with K = 1");
  }
  if (derivative_rows && derivatives == nullptr) {
    throw ConfigError("assemble_system: plain SISO LSL needs lambda-derivative snapshots");
  }

  const Vector weights = trapezoid_weights(background.grid);
  const bool helmholtz = kind == EquationKind::helmholtz;

  LslSystem sys;
  sys.mode = mode;
  sys.kind = kind;
  sys.grid = background.grid;

  std::vector<kernels::RowSpec> specs;
  std::vector<double> misfit;
  for (int j = 0; j < m; ++j) {
    const double lambda = data.lambdas[static_cast<std::size_t>(j)];
    const Matrix delta = data0.values[static_cast<std::size_t>(j)] - data.values[static_cast<std::size_t>(j)];
    for (int r = 0; r < k; ++r) {
      for (int s = r; s < k; ++s) {
        specs.push_back({Eigen::Index{j} * k + r, Eigen::Index{j} * k + s, helmholtz ? lambda : 1.0});
        sys.rows.push_back({lambda, j, r, s, false});
        misfit.push_back(delta(r, s));
      }
    }
  }
  Matrix kernel = kernels::parallel::weighted_row_products(background.values, right->values,
                                                          weights, specs);

  if (derivative_rows) {
    // d/dlambda [c(lambda) u0 u] = c'(u0 u) + c (u0' u + u0 u').
    std::vector<kernels::RowSpec> first;
    std::vector<kernels::RowSpec> second;
    std::vector<kernels::RowSpec> plain;
    for (int j = 0; j < m; ++j) {
      const double lambda = data.lambdas[static_cast<std::size_t>(j)];
      const double c = helmholtz ? lambda : 1.0;
      first.push_back({j, j, c});
      second.push_back({j, j, c});
      plain.push_back({j, j, helmholtz ? 1.0 : 0.0});
      sys.rows.push_back({lambda, j, 0, 0, true});
      misfit.push_back(data0.derivatives[static_cast<std::size_t>(j)](0, 0) -
                       data.derivatives[static_cast<std::size_t>(j)](0, 0));
    }
    Matrix extra = kernels::parallel::weighted_row_products(derivatives->background.values,
                                                            right->values, weights, first);
    extra += kernels::parallel::weighted_row_products(background.values,
                                                      derivatives->internal.values, weights, second);
    if (helmholtz) {
      extra += kernels::parallel::weighted_row_products(background.values, right->values, weights,
                                                        plain);
    }
    Matrix stacked(kernel.rows() + extra.rows(), kernel.cols());
    stacked << kernel, extra;
    kernel = std::move(stacked);
  }

  sys.kernel = std::move(kernel);
  sys.misfit = Eigen::Map<Vector>(misfit.data(), static_cast<Eigen::Index>(misfit.size()));
  return sys;
}

Vector ReconstructionResult::coefficient() const {
  if (kind == EquationKind::helmholtz) return estimate.array() + 1.0;
  return estimate;
}

ReconstructionResult solve_reconstruction(const LslSystem& system, double rel_threshold) {
  if (system.kernel.rows() == 0) throw DimensionError("solve_reconstruction: empty system");
  ReconstructionResult out;
  out.estimate = numerics::truncated_pinv_solve(system.kernel, system.misfit, rel_threshold);
  out.mode = system.mode;
  out.kind = system.kind;
  out.pinv_threshold = rel_threshold;
  out.residual = (system.kernel * out.estimate - system.misfit).norm();
  out.rows = static_cast<int>(system.kernel.rows());
  return out;
}

InversionSettings plain_lsl_settings(double pinv_threshold) {
  // The relative cut is scaled by the ROM order inside Inverter::run.
  return {pinv_threshold, std::numeric_limits<double>::epsilon(), ThresholdMode::relative};
}

// ---------------------------------------------------------------------------

Inverter::Inverter(GridSpec grid, EquationKind kind, std::vector<double> lambdas,
                   SourceSet sources)
    : grid_(grid), kind_(kind), lambdas_(std::move(lambdas)), sources_(std::move(sources)) {
  background_ = background_basis(grid_, kind_, lambdas_, sources_);
}

SnapshotMatrix Inverter::background_derivatives() const {
  const DiscreteOperator op = assemble_operator(grid_, CoefficientField::background(grid_, kind_));
  SnapshotMatrix out = background_;
  const int k = background_.block;
  for (std::size_t j = 0; j < lambdas_.size(); ++j) {
    const ShiftedSolver solver(op, lambdas_[j]);
    const auto cols = background_.values.middleCols(static_cast<Eigen::Index>(j) * k, k);
    out.values.middleCols(static_cast<Eigen::Index>(j) * k, k) =
        -solver.solve_weighted(op.mass.asDiagonal() * cols);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

LanczosFactors orthogonalize(const TruncatedRom& rom, const char* which) {
  if (rom.block == 1) {
    LanczosFactors f = m_symmetric_lanczos(rom.mass, rom.stiffness, rom.rhs.col(0));
    if (f.breakdown) {
      throw BreakdownError(std::string("Lanczos breakdown on the ") + which + " ROM after " +
                               std::to_string(f.steps()) + " of " +
                               std::to_string(rom.order()) + " steps",
                           0.0, f.steps());
    }
    return f;
  }
  return block_lanczos(rom.mass, rom.stiffness, rom.rhs);
}

}  // namespace

InversionRun Inverter::run(const TransferDataset& data, const TransferDataset& background_data,
                           InversionMode mode, const InversionSettings& settings) const {
  if (data.lambdas != lambdas_ || data.block_size() != sources_.count()) {
    throw DimensionError("Inverter::run: dataset does not match the acquisition setup");
  }
  if (data.kind != kind_ || background_data.kind != kind_) {
    throw ConfigError("Inverter::run: dataset equation kind does not match the setup");
  }
  InversionRun run;
  auto& diag = run.diagnostics;
  diag.full_order = static_cast<Eigen::Index>(lambdas_.size()) * sources_.count();

  if (mode == InversionMode::born) {
    auto t = Clock::now();
    const LslSystem sys = assemble_system(background_, nullptr, data, background_data, mode, kind_);
    diag.seconds["assemble"] = seconds_since(t);
    t = Clock::now();
    run.result = solve_reconstruction(sys, settings.pinv_threshold);
    diag.seconds["solve"] = seconds_since(t);
    return run;
  }

  auto t = Clock::now();
  const RomMatrices rom = build_rom(data);
  const RomMatrices rom0 = build_rom(background_data);
  diag.health = rom_health(rom);
  diag.seconds["rom"] = seconds_since(t);

  t = Clock::now();
  double alpha = settings.gramian_threshold;
  if (mode == InversionMode::lsl && settings.gramian_mode == ThresholdMode::relative) {
    alpha *= static_cast<double>(rom.order());
  }
  const TruncatedRom truncated = truncate_gramian(rom, alpha, settings.gramian_mode);
  const TruncatedRom truncated0 = project_onto(rom0, truncated);
  diag.order = truncated.order();
  diag.gramian_cut =
      settings.gramian_mode == ThresholdMode::absolute ? alpha : alpha * truncated.sigma[0];
  diag.projector_defect = projector_defect(background_, truncated.basis);
  diag.seconds["truncate"] = seconds_since(t);

  t = Clock::now();
  const LanczosFactors factors = orthogonalize(truncated, "measured");
  const LanczosFactors factors0 = orthogonalize(truncated0, "background");
  diag.seconds["lanczos"] = seconds_since(t);

  t = Clock::now();
  SnapshotMatrix internal = data_internal_solutions(background_, truncated.basis, factors0.basis,
                                                    factors.basis, truncated.mass);
  std::optional<DerivativeSnapshots> derivatives;
  if (mode == InversionMode::lsl && sources_.count() == 1) {
    DerivativeSnapshots d{background_derivatives(), internal};
    const Matrix basis = background_.values * truncated.basis * factors0.basis;
    for (std::size_t j = 0; j < lambdas_.size(); ++j) {
      d.internal.values.col(static_cast<Eigen::Index>(j)) = siso_internal_derivative_at(
          lambdas_[j], basis, factors.tridiagonal, truncated.rhs.col(0), truncated.mass);
    }
    derivatives = std::move(d);
  }
  diag.seconds["internal"] = seconds_since(t);

  t = Clock::now();
  const LslSystem sys = assemble_system(background_, &internal, data, background_data, mode, kind_,
                                        derivatives ? &*derivatives : nullptr);
  diag.seconds["assemble"] = seconds_since(t);
  t = Clock::now();
  run.result = solve_reconstruction(sys, settings.pinv_threshold);
  diag.seconds["solve"] = seconds_since(t);
  run.internal = std::move(internal);
  return run;
}

double relative_l2_error(const GridSpec& grid, const Vector& estimate, const Vector& truth,
                         const std::vector<bool>* mask) {
  const Vector w = trapezoid_weights(grid);
  if (estimate.size() != w.size() || truth.size() != w.size()) {
    throw DimensionError("relative_l2_error: field sizes do not match the grid");
  }
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (mask != nullptr && !(*mask)[static_cast<std::size_t>(i)]) continue;
    const double e = estimate[i] - truth[i];
    num += w[i] * e * e;
    den += w[i] * truth[i] * truth[i];
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

std::vector<ModeComparison> compare_modes(
    const Inverter& inverter, const CoefficientField& truth, const TransferDataset& data,
    const TransferDataset& background_data,
    const std::vector<std::pair<InversionMode, InversionSettings>>& modes) {
  std::vector<ModeComparison> out;
  const Vector contrast = truth.contrast();
  for (const auto& [mode, settings] : modes) {
    ModeComparison c;
    c.mode = mode;
    c.result = inverter.run(data, background_data, mode, settings).result;
    c.relative_error = relative_l2_error(inverter.grid(), c.result.estimate, contrast);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace reglsl
