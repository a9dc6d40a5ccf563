// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "reglsl/error.hpp"
#include "reglsl/experiment.hpp"
#include "reglsl/io.hpp"
#include "reglsl/lanczos.hpp"
#include "reglsl/numerics.hpp"

namespace fs = std::filesystem;
using namespace reglsl;

namespace {

// Pinned tolerances and frozen regression bounds.
constexpr double kGramianTol = 1e-9;         // criterion 1
constexpr double kInterpTol = 1e-9;          // criterion 2
constexpr double kDerivTol = 1e-6;           // criterion 2, centered difference at delta = 1e-4
constexpr double kDelta = 1e-4;
constexpr double kOrthoTol = 1e-8;           // criterion 3
constexpr double kEigTol = 1e-8;             // criterion 3
constexpr double kAngleTol = 1e-6;           // criterion 4
constexpr double kZeroFieldTol = 1e-8;       // criterion 5
constexpr double kProjectionTol = 1e-9;      // criterion 5
constexpr double kBornOracleTol = 0.01;      // criterion 6
// 1.25 x first clean-run errors: 0.44714114943859634 and 0.38384198 (on [0, 0.35]).
constexpr double kSisoSchrodingerBound = 0.55893;
constexpr double kSisoHelmholtzBound = 0.47981;
constexpr int kPeakCells1d = 2;              // criteria 7, 8
constexpr int kPeakCells2d = 3;              // criterion 11

const fs::path kConfigDir = REGLSL_CONFIG_DIR;
const fs::path kRunDir = REGLSL_RUN_DIR;

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o = {false, std::string("exception ") + std::string(e.category()) + ": " + e.what()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] C%-2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ExperimentConfig config(const std::string& name) { return load_config(kConfigDir / (name + ".cfg")); }

struct Problem {
  ExperimentConfig cfg;
  SourceSet sources;
  CoefficientField truth;
  TransferDataset data;
  TransferDataset data0;
};

Problem problem(const std::string& name) {
  Problem p{config(name), {}, {}, {}, {}};
  p.sources = p.cfg.source_set();
  p.truth = p.cfg.truth();
  p.data = generate_dataset(p.cfg.grid, p.truth, p.cfg.lambdas, p.sources);
  p.data0 = generate_dataset(p.cfg.grid, CoefficientField::background(p.cfg.grid, p.cfg.kind),
                             p.cfg.lambdas, p.sources);
  return p;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Eigenvalues of the pencil (S, M) through M = L L^T, independent of the
// library's generalized solver. Descending.
Vector pencil_oracle(const Matrix& mass, const Matrix& stiffness) {
  const Eigen::LLT<Matrix> llt(numerics::symmetrized(mass));
  const Matrix l = llt.matrixL();
  const Matrix linv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(l.rows(), l.cols()));
  const Matrix c = numerics::symmetrized(linv * stiffness * linv.transpose());
  Vector e = Eigen::SelfAdjointEigenSolver<Matrix>(c).eigenvalues();
  return e.reverse();
}

// Largest entry of the estimate, as a node index.
Eigen::Index argmax(const Vector& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return i;
}

std::vector<bool> interval_mask(const GridSpec& grid, double lo, double hi) {
  const Matrix xy = node_coordinates(grid);
  std::vector<bool> mask(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    mask[static_cast<std::size_t>(i)] = xy(i, 0) >= lo - 1e-12 && xy(i, 0) <= hi + 1e-12;
  }
  return mask;
}

/// Node of the largest value within `radius` (Chebyshev, in cells) of `node`.
Eigen::Index local_peak(const GridSpec& grid, const Vector& v, Eigen::Index node, int radius) {
  const int n = grid.nodes;
  const int cx = static_cast<int>(node % n), cy = static_cast<int>(node / n);
  Eigen::Index best = node;
  for (int y = std::max(0, cy - radius); y <= std::min(n - 1, cy + radius); ++y) {
    for (int x = std::max(0, cx - radius); x <= std::min(n - 1, cx + radius); ++x) {
      const Eigen::Index i = Eigen::Index{y} * n + x;
      if (v[i] > v[best]) best = i;
    }
  }
  return best;
}

/// Local maxima of a 2D field in decreasing order, at least `separation`
/// cells apart.
std::vector<Eigen::Index> peaks_2d(const GridSpec& grid, const Vector& v, int count,
                                   int separation) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] > v[b]; });
  const int n = grid.nodes;
  std::vector<Eigen::Index> out;
  for (const auto i : order) {
    if (static_cast<int>(out.size()) == count) break;
    if (local_peak(grid, v, i, 1) != i) continue;
    bool far = true;
    for (const auto j : out) {
      const auto d = std::max(std::abs(static_cast<int>(i % n - j % n)),
                              std::abs(static_cast<int>(i / n - j / n)));
      far = far && d >= separation;
    }
    if (far) out.push_back(i);
  }
  return out;
}

int cell_distance(const GridSpec& grid, Eigen::Index a, Eigen::Index b) {
  const int n = grid.nodes;
  return std::max(std::abs(static_cast<int>(a % n - b % n)),
                  std::abs(static_cast<int>(a / n - b / n)));
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string diag(const RunManifest& m, const std::string& stage, const std::string& key) {
  const StageRecord* s = m.find(stage);
  if (s == nullptr) return "";
  const auto it = s->diagnostics.find(key);
  return it == s->diagnostics.end() ? "" : it->second;
}

double diag_number(const RunManifest& m, const std::string& stage, const std::string& key) {
  const std::string text = diag(m, stage, key);
  return text.empty() ? std::nan("") : std::stod(text);
}

RunOptions options_for(const std::string& run) {
  RunOptions o;
  o.out_dir = kRunDir / run;
  fs::remove_all(o.out_dir);
  return o;
}

// Acceptance runs, recorded for the determinism check.
struct RecordedRun {
  std::string name;
  std::function<RunManifest(const RunOptions&)> command;
  RunManifest manifest;
};
std::vector<RecordedRun> runs;

const RunManifest& record(const std::string& name,
                          std::function<RunManifest(const RunOptions&)> command) {
  RecordedRun r{name, std::move(command), {}};
  r.manifest = r.command(options_for(name + "_a"));
  runs.push_back(std::move(r));
  return runs.back().manifest;
}

// ---------------------------------------------------------------------------

Outcome loewner_gramian() {
  const auto start = Clock::now();
  const Problem p = problem("siso_schrodinger");
  const RomMatrices rom = build_rom(p.data);
  const DiscreteOperator op = assemble_operator(p.cfg.grid, p.truth);
  const Matrix v = solve_snapshots(op, p.cfg.lambdas, p.sources);
  const Matrix gram_m = v.transpose() * op.mass.asDiagonal() * v;
  const Matrix gram_s = v.transpose() * (op.stiffness * v);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < gram_m.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram_m.cols(); ++j) {
      worst = std::max(worst, std::abs(rom.mass(i, j) - gram_m(i, j)) / std::abs(gram_m(i, j)));
      worst = std::max(worst,
                       std::abs(rom.stiffness(i, j) - gram_s(i, j)) / std::abs(gram_s(i, j)));
    }
  }
  const double t = seconds(start);
  return {worst <= kGramianTol && t < 5.0,
          fmt("max entrywise rel dev %.3g (tol %.0e), %.2f s (limit 5 s)", worst, kGramianTol, t)};
}

Outcome interpolation() {
  const auto start = Clock::now();
  double worst_f = 0.0, worst_d = 0.0;
  for (const char* name : {"siso_schrodinger", "siso_helmholtz", "mimo_schrodinger",
                           "mimo_helmholtz"}) {
    const Problem p = problem(name);
    const RomMatrices rom = build_rom(p.data);
    for (int j = 0; j < p.data.points(); ++j) {
      const double lam = p.data.lambdas[static_cast<std::size_t>(j)];
      const Matrix& f = p.data.values[static_cast<std::size_t>(j)];
      const Matrix& df = p.data.derivatives[static_cast<std::size_t>(j)];
      worst_f = std::max(worst_f, max_abs(rom_transfer(rom, lam) - f) / max_abs(f));
      const Matrix fd = (rom_transfer(rom, lam + kDelta) - rom_transfer(rom, lam - kDelta)) /
                        (2.0 * kDelta);
      worst_d = std::max(worst_d, max_abs(fd - df) / max_abs(df));
    }
  }
  const double t = seconds(start);
  return {worst_f <= kInterpTol && worst_d <= kDerivTol && t < 10.0,
          fmt("F rel dev %.3g (tol %.0e), centered dF rel dev %.3g (tol %.0e), %.2f s (limit 10 s)",
              worst_f, kInterpTol, worst_d, kDerivTol, t)};
}

Outcome lanczos_contracts() {
  double ortho = 0.0, eig = 0.0;
  std::vector<std::string> notes;
  for (const char* name : {"siso_schrodinger", "siso_helmholtz", "mimo_schrodinger",
                           "mimo_helmholtz"}) {
    const Problem p = problem(name);
    const TruncatedRom t =
        truncate_gramian(build_rom(p.data), p.cfg.gramian_threshold, p.cfg.gramian_mode);
    std::vector<TruncatedRom> roms{t};
    try {
      roms.push_back(project_onto(build_rom(p.data0), t));
    } catch (const BreakdownError& e) {
      notes.push_back(std::string(name) + " background not SPD");
    }
    for (const auto& r : roms) {
      const LanczosFactors f = r.block == 1
                                   ? m_symmetric_lanczos(r.mass, r.stiffness, r.rhs.col(0))
                                   : block_lanczos(r.mass, r.stiffness, r.rhs);
      if (f.breakdown) notes.push_back(std::string(name) + " scalar breakdown");
      const Matrix q = f.basis;
      ortho = std::max(ortho, max_abs(q.transpose() * r.mass * q -
                                      Matrix::Identity(q.cols(), q.cols())));
      const Vector te = numerics::sym_eig(f.tridiagonal).eigenvalues;
      const Vector pe = pencil_oracle(r.mass, r.stiffness);
      if (te.size() != pe.size()) {
        notes.push_back(std::string(name) + " T size mismatch");
        continue;
      }
      eig = std::max(eig, (te - pe).cwiseAbs().maxCoeff() / pe.cwiseAbs().maxCoeff());
    }
  }
  std::string extra;
  for (const auto& n : notes) extra += "; " + n;
  return {ortho <= kOrthoTol && eig <= kEigTol && notes.empty(),
          fmt("max |Q^T M Q - I| %.3g (tol %.0e), T vs pencil eig rel %.3g (tol %.0e)", ortho,
              kOrthoTol, eig, kEigTol) +
              extra};
}

Outcome krylov_equivalence() {
  const Problem p = problem("siso_schrodinger");
  const RomMatrices rom = build_rom(p.data);
  const TruncatedRom full = truncate_gramian(rom, std::numeric_limits<double>::min());
  const double tau = stable_time_step(full.mass, full.stiffness);
  const int steps = static_cast<int>(full.order());
  const double angle =
      krylov_equivalence_check(full.mass, full.stiffness, full.rhs.col(0), tau, steps);
  return {angle <= kAngleTol,
          fmt("l = %d, tau = %.4g, max principal angle %.3g (tol %.0e)", steps, tau, angle,
              kAngleTol)};
}

Outcome zero_contrast() {
  double worst_field = 0.0, worst_u = 0.0;
  for (const char* name : {"siso_schrodinger", "mimo_schrodinger"}) {
    const Problem p = problem(name);
    const Inverter inv(p.cfg.grid, p.cfg.kind, p.cfg.lambdas, p.sources);
    for (const auto mode : {InversionMode::born, InversionMode::lsl, InversionMode::reg_lsl}) {
      const InversionSettings s = p.cfg.settings_for(mode);
      const InversionRun run = inv.run(p.data0, p.data0, mode, s);
      // Sensitivity scale: field produced by a misfit equal to the data itself.
      TransferDataset shifted = p.data0;
      for (auto& f : shifted.values) f *= 0.0;
      for (auto& d : shifted.derivatives) d *= 0.0;
      const InversionRun probe = inv.run(p.data0, shifted, InversionMode::born, s);
      const double scale = probe.result.estimate.cwiseAbs().maxCoeff();
      worst_field = std::max(worst_field, run.result.estimate.cwiseAbs().maxCoeff() / scale);
      if (mode != InversionMode::born) {
        const TruncatedRom t = truncate_gramian(
            build_rom(p.data0),
            mode == InversionMode::lsl ? s.gramian_threshold * double(p.data0.points() *
                                                                      p.data0.block_size())
                                       : s.gramian_threshold,
            s.gramian_mode);
        const Matrix expected = inv.background().values * t.basis * t.basis.transpose();
        worst_u = std::max(worst_u, (run.internal->values - expected).norm() / expected.norm());
      }
    }
  }
  return {worst_field <= kZeroFieldTol && worst_u <= kProjectionTol,
          fmt("max |p|/scale %.3g (tol %.0e), |U - V0 Z Z^T|/|V0 Z Z^T| %.3g (tol %.0e)",
              worst_field, kZeroFieldTol, worst_u, kProjectionTol)};
}

// Independent 1D operator: trapezoid-weighted Neumann Laplacian plus p, as a
// tridiagonal system solved by the Thomas algorithm.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
};

Vector thomas(Tridiagonal a, Vector rhs) {
  const auto n = rhs.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double m = a.lower[k] / a.diag[k - 1];
    a.diag[k] -= m * a.upper[k - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= a.diag[static_cast<std::size_t>(n - 1)];
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    rhs[i] = (rhs[i] - a.upper[k] * rhs[i + 1]) / a.diag[k];
  }
  return rhs;
}

/// u(0) for the unit source at x = 0: F(lambda) of the 1D Schrödinger problem.
double transfer_1d(int n, double h, const Vector& p, double lambda) {
  Tridiagonal a;
  a.lower.assign(static_cast<std::size_t>(n), -1.0 / h);
  a.upper.assign(static_cast<std::size_t>(n), -1.0 / h);
  a.diag.assign(static_cast<std::size_t>(n), 2.0 / h);
  a.diag.front() = a.diag.back() = 1.0 / h;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? h / 2 : h;
    a.diag[static_cast<std::size_t>(i)] += w * (p[i] + lambda);
  }
  Vector rhs = Vector::Zero(n);
  rhs[0] = 1.0;
  return thomas(a, rhs)[0];
}

Outcome born_oracle() {
  ExperimentConfig cfg = config("siso_schrodinger");
  cfg.bumps.front().amplitude = 1e-4;
  const SourceSet src = cfg.source_set();
  const CoefficientField truth = cfg.truth();
  const TransferDataset data = generate_dataset(cfg.grid, truth, cfg.lambdas, src);
  const TransferDataset data0 =
      generate_dataset(cfg.grid, CoefficientField::background(cfg.grid, cfg.kind), cfg.lambdas, src);
  const Inverter inv(cfg.grid, cfg.kind, cfg.lambdas, src);
  const double pinv = cfg.pinv_for(InversionMode::born);
  const Vector born = inv.run(data, data0, InversionMode::born, {pinv, 1.0}).result.estimate;

  // Frechet kernel by central differences, two forward solves per node and lambda.
  const int n = cfg.grid.nodes;
  const double h = cfg.grid.spacing();
  // Large enough that rounding in F stays far below the truncation level of
  // the pseudoinverse; the central-difference error is O(eps^2 h^2).
  const double eps = 1e-2;
  Matrix kernel(static_cast<Eigen::Index>(cfg.lambdas.size()), n);
  Vector misfit(kernel.rows());
  const Vector zero = Vector::Zero(n);
  for (std::size_t j = 0; j < cfg.lambdas.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    for (int i = 0; i < n; ++i) {
      Vector plus = zero, minus = zero;
      plus[i] = eps;
      minus[i] = -eps;
      kernel(row, i) = (transfer_1d(n, h, plus, cfg.lambdas[j]) -
                        transfer_1d(n, h, minus, cfg.lambdas[j])) /
                       (2 * eps);
    }
    misfit[row] = data.values[j](0, 0) - data0.values[j](0, 0);
  }
  Eigen::JacobiSVD<Matrix> svd(kernel, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector coeff = svd.matrixU().transpose() * misfit;
  for (Eigen::Index k = 0; k < sv.size(); ++k) coeff[k] = sv[k] >= pinv * sv[0] ? coeff[k] / sv[k] : 0.0;
  const Vector oracle = svd.matrixV() * coeff;

  std::vector<bool> support(static_cast<std::size_t>(n));
  const Vector contrast = truth.contrast();
  for (int i = 0; i < n; ++i) support[static_cast<std::size_t>(i)] = contrast[i] >= 1e-3 * contrast.maxCoeff();
  const double err = relative_l2_error(cfg.grid, born, oracle, &support);
  return {err <= kBornOracleTol,
          fmt("gamma = 1e-4, rel L2 dev on support %.3g (tol %.2g)", err, kBornOracleTol)};
}

Outcome siso_reconstruction(const std::string& name, double lo, double hi, double bound,
                            double limit) {
  const auto start = Clock::now();
  const ExperimentConfig cfg = config(name);
  const RunManifest& m = record(name + "_invert", [cfg](const RunOptions& o) {
    return cmd_invert(cfg, o);
  });
  const double t = seconds(start);
  const Vector est = read_field_csv(kRunDir / (name + "_invert_a") / "recon_reg_lsl.csv");
  const Vector truth = cfg.truth().contrast();
  const auto mask = interval_mask(cfg.grid, lo, hi);
  const double err = relative_l2_error(cfg.grid, est, truth, &mask);
  const double h = cfg.grid.spacing();
  const double x_peak = cfg.grid.coordinate(static_cast<int>(argmax(est)));
  const double x_true = cfg.bumps.front().center.front();
  const bool peak_ok = std::abs(x_peak - x_true) <= kPeakCells1d * h + 1e-12;
  const double peak_ratio = est.maxCoeff() / truth.maxCoeff();
  return {peak_ok && err <= bound && t < limit,
          fmt("peak at x = %.4g (|dx| = %.3g, tol %.3g), peak ratio %.3g; rel L2 on [%g, %g] %.4g "
              "(bound %.5g); born %s, lsl %s; %.2f s (limit %.0f s)",
              x_peak, std::abs(x_peak - x_true), kPeakCells1d * h, peak_ratio, lo, hi, err, bound,
              diag(m, "invert_born", "relative_error").substr(0, 6).c_str(),
              diag(m, "invert_lsl", "relative_error").substr(0, 6).c_str(), t, limit)};
}

Outcome mimo_ordering() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (const char* name : {"mimo_schrodinger", "mimo_helmholtz"}) {
    const ExperimentConfig cfg = config(name);
    const RunManifest& m = record(std::string(name) + "_invert",
                                  [cfg](const RunOptions& o) { return cmd_invert(cfg, o); });
    const double born = diag_number(m, "invert_born", "relative_error");
    const double lsl = diag_number(m, "invert_lsl", "relative_error");
    const double reg = diag_number(m, "invert_reg_lsl", "relative_error");
    const bool schrodinger = cfg.kind == EquationKind::schrodinger;
    const bool ok = reg < born && (!schrodinger || reg < lsl);
    pass = pass && ok;
    detail += fmt("%s born %.4g lsl %.4g reg_lsl %.4g", name, born, lsl, reg);
    const std::string status = diag(m, "invert_reg_lsl", "status");
    if (status != "ok") detail += " [reg_lsl " + status.substr(0, status.find(':')) + "]";
    detail += "; ";
  }
  const double t = seconds(start);
  return {pass && t < 300.0, detail + fmt("%.1f s (limit 300 s)", t)};
}

Outcome regularization_sweep() {
  const ExperimentConfig cfg = config("mimo_helmholtz");
  const RunManifest& m =
      record("mimo_helmholtz_sweep", [cfg](const RunOptions& o) { return cmd_sweep(cfg, o); });
  std::string detail;
  std::size_t first = 0, last = 0;
  for (std::size_t i = 0; i < cfg.sweep_alphas.size(); ++i) {
    if (cfg.sweep_alphas[i] == 1e-4) first = i;
    if (cfg.sweep_alphas[i] == 1e-16) last = i;
    const std::string stage = "sweep_alpha_" + std::to_string(i + 1);
    const std::string status = diag(m, stage, "status");
    detail += fmt("alpha %.0e: %s; ", cfg.sweep_alphas[i],
                  status == "ok" ? diag(m, stage, "relative_error").substr(0, 6).c_str()
                                 : status.substr(0, status.find(':')).c_str());
  }
  const double e4 = diag_number(m, "sweep_alpha_" + std::to_string(first + 1), "relative_error");
  const double e16 = diag_number(m, "sweep_alpha_" + std::to_string(last + 1), "relative_error");
  // Also recorded for the determinism check; not part of this criterion.
  const ExperimentConfig schr = config("mimo_schrodinger");
  record("mimo_schrodinger_sweep", [schr](const RunOptions& o) { return cmd_sweep(schr, o); });
  return {e16 < e4, detail + "need err(1e-16) < err(1e-4)"};
}

Outcome noise_robustness() {
  const ExperimentConfig cfg = config("mimo_schrodinger");
  const RunManifest& m =
      record("mimo_schrodinger_noise", [cfg](const RunOptions& o) { return cmd_noise(cfg, o); });
  const Vector truth = cfg.truth().contrast();
  const auto true_peaks = peaks_2d(cfg.grid, truth, 2, 6);
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < cfg.noise_percents.size(); ++i) {
    const std::string tag = "level_" + std::to_string(i + 1);
    const double pct = cfg.noise_percents[i];
    const std::string status = diag(m, "noise_" + tag, "status");
    int worst = 1 << 20;
    if (status == "ok") {
      const Vector est = read_field_csv(kRunDir / "mimo_schrodinger_noise_a" / ("recon_" + tag + ".csv"));
      const auto found = peaks_2d(cfg.grid, est, 2, 6);
      worst = 0;
      for (const auto tp : true_peaks) {
        int best = 1 << 20;
        for (const auto fp : found) best = std::min(best, cell_distance(cfg.grid, tp, fp));
        worst = std::max(worst, best);
      }
    }
    const bool ok = worst <= kPeakCells2d;
    const bool asserted = pct <= 2.0;
    if (asserted) pass = pass && ok;
    detail += fmt("%g%%: peak offset %d cells, rel L2 %s%s; ", pct, worst,
                  diag(m, "noise_" + tag, "relative_error").substr(0, 6).c_str(),
                  asserted ? "" : (ok ? " (reported: retained)" : " (reported: lost)"));
  }
  const ExperimentConfig helm = config("mimo_helmholtz");
  record("mimo_helmholtz_noise", [helm](const RunOptions& o) { return cmd_noise(helm, o); });
  return {pass, detail + fmt("tol %d cells", kPeakCells2d)};
}

Outcome determinism() {
  std::size_t files = 0;
  std::vector<std::string> differing;
  for (const auto& r : runs) {
    const RunManifest again = r.command(options_for(r.name + "_b"));
    const auto outputs = r.manifest.outputs();
    if (outputs != again.outputs()) differing.push_back(r.name + " (output list)");
    for (const auto& o : outputs) {
      ++files;
      if (read_bytes(kRunDir / (r.name + "_a") / o) != read_bytes(kRunDir / (r.name + "_b") / o)) {
        differing.push_back(r.name + "/" + o);
      }
    }
  }
  std::string detail = fmt("%zu runs, %zu output files compared bytewise", runs.size(), files);
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() && files > 0, detail};
}

}  // namespace

int main() {
  fs::create_directories(kRunDir);
  criterion(1, "Loewner-Gramian identity", loewner_gramian);
  criterion(2, "ROM interpolation", interpolation);
  criterion(3, "Lanczos contracts", lanczos_contracts);
  criterion(4, "Lanczos / time-snapshot Gram-Schmidt equivalence", krylov_equivalence);
  criterion(5, "zero-contrast fixed point", zero_contrast);
  criterion(6, "Born small-contrast oracle", born_oracle);
  criterion(7, "SISO Schrodinger reconstruction", [] {
    return siso_reconstruction("siso_schrodinger", 0.0, 1.0, kSisoSchrodingerBound, 30.0);
  });
  criterion(8, "SISO Helmholtz reconstruction", [] {
    return siso_reconstruction("siso_helmholtz", 0.0, 0.35, kSisoHelmholtzBound, 30.0);
  });
  criterion(9, "MIMO mode ordering", mimo_ordering);
  criterion(10, "Helmholtz regularization sweep", regularization_sweep);
  criterion(11, "MIMO Schrodinger noise robustness", noise_robustness);
  criterion(12, "determinism", determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
