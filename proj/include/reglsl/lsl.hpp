#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reglsl/internal_field.hpp"
#include "reglsl/lanczos.hpp"
#include "reglsl/regularizer.hpp"
#include "reglsl/rom.hpp"

namespace reglsl {

enum class InversionMode {
  born,     // background fields on both sides of the kernel
  lsl,      // data-generated fields, numerical-rank Gramian cut, SISO derivative rows
  reg_lsl,  // data-generated fields after Gramian truncation at alpha
};

std::string_view to_string(InversionMode mode);
InversionMode parse_inversion_mode(std::string_view text);

struct LslRow {
  double lambda = 0.0;
  int point = 0;  // spectral point index j
  int r = 0;      // background source
  int s = 0;      // data-generated source, r <= s
  bool derivative = false;
};

/// Linear system  misfit = kernel * field, with quadrature weights folded into
/// the kernel rows so that a row times nodal values is a discrete integral.
struct LslSystem {
  Matrix kernel;  // rows x grid.size()
  Vector misfit;  // (F0 - F) entries, and dF0 - dF for derivative rows
  InversionMode mode = InversionMode::reg_lsl;
  EquationKind kind = EquationKind::schrodinger;
  GridSpec grid;
  std::vector<LslRow> rows;
};

/// Lambda-derivatives of both snapshot sets at the data points; required
/// for the derivative rows of plain LSL (SISO only).
struct DerivativeSnapshots {
  SnapshotMatrix background;
  SnapshotMatrix internal;
};

/// Builds rows (F0 - F)_{rs}(lambda_j) = c_j * sum_i w_i u0^(r)_i u^(s)_i x_i for
/// r <= s, with c_j = 1 (Schrödinger, x = p) or lambda_j (Helmholtz, x = n - 1).
/// `internal` is ignored in born mode (u := u0). In lsl mode with K = 1 the
/// derivative rows are appended; `derivatives` must then be provided.
LslSystem assemble_system(const SnapshotMatrix& background, const SnapshotMatrix* internal,
                          const TransferDataset& data, const TransferDataset& data0,
                          InversionMode mode, EquationKind kind,
                          const DerivativeSnapshots* derivatives = nullptr);

struct ReconstructionResult {
  Vector estimate;  // p, or n - 1 for Helmholtz
  InversionMode mode = InversionMode::reg_lsl;
  EquationKind kind = EquationKind::schrodinger;
  double pinv_threshold = 0.0;
  double residual = 0.0;  // ||kernel * estimate - misfit||
  int rows = 0;

  /// n = 1 + estimate for Helmholtz, the estimate itself otherwise.
  Vector coefficient() const;
};

ReconstructionResult solve_reconstruction(const LslSystem& system, double rel_threshold);

/// Gramian cut used by the given mode. Plain LSL keeps every eigenvalue above
/// the numerical-rank floor (order * eps * sigma_max).
struct InversionSettings {
  double pinv_threshold = 6e-5;
  double gramian_threshold = 5e-12;
  ThresholdMode gramian_mode = ThresholdMode::absolute;
};

InversionSettings plain_lsl_settings(double pinv_threshold);

struct InversionDiagnostics {
  RomHealth health;
  Eigen::Index order = 0;  // l
  Eigen::Index full_order = 0;  // mK
  double projector_defect = 0.0;
  double gramian_cut = 0.0;
  std::map<std::string, double> seconds;
};

struct InversionRun {
  ReconstructionResult result;
  InversionDiagnostics diagnostics;
  std::optional<SnapshotMatrix> internal;  // absent in born mode
};

/// Full pipeline for a fixed acquisition (grid, kind, spectral points,
/// sources). Background solutions are computed once and reused.
class Inverter {
 public:
  Inverter(GridSpec grid, EquationKind kind, std::vector<double> lambdas, SourceSet sources);

  InversionRun run(const TransferDataset& data, const TransferDataset& background_data,
                   InversionMode mode, const InversionSettings& settings) const;

  const SnapshotMatrix& background() const { return background_; }
  const GridSpec& grid() const { return grid_; }
  const SourceSet& sources() const { return sources_; }

 private:
  SnapshotMatrix background_derivatives() const;

  GridSpec grid_;
  EquationKind kind_;
  std::vector<double> lambdas_;
  SourceSet sources_;
  SnapshotMatrix background_;
};

/// Relative discrete L2 error ||estimate - truth||_w / ||truth||_w, optionally
/// restricted to nodes where `mask` is true.
double relative_l2_error(const GridSpec& grid, const Vector& estimate, const Vector& truth,
                         const std::vector<bool>* mask = nullptr);

struct ModeComparison {
  InversionMode mode = InversionMode::reg_lsl;
  ReconstructionResult result;
  double relative_error = 0.0;
};

/// Runs every requested mode on identical data and reports the relative L2
/// error of each estimate against the true contrast.
std::vector<ModeComparison> compare_modes(
    const Inverter& inverter, const CoefficientField& truth, const TransferDataset& data,
    const TransferDataset& background_data,
    const std::vector<std::pair<InversionMode, InversionSettings>>& modes);

}  // namespace reglsl
