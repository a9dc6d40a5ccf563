#include "reglsl/forward_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "reglsl/error.hpp"
#include "reglsl/kernels.hpp"

namespace reglsl {

std::string_view to_string(EquationKind kind) {
  switch (kind) {
    case EquationKind::schrodinger:
      return "schrodinger";
    case EquationKind::helmholtz:
      return "helmholtz";
  }
  return "unknown";
}

EquationKind parse_equation_kind(std::string_view text) {
  if (text == "schrodinger") return EquationKind::schrodinger;
  if (text == "helmholtz") return EquationKind::helmholtz;
  throw ParseError("unknown equation kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Grid

GridSpec GridSpec::from_spacing(int dimension, double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi > lo)) {
    throw DimensionError("grid: need h > 0 and hi > lo");
  }
  const double cells = (hi - lo) / h;
  const long rounded = std::lround(cells);
  if (std::abs(rounded * h - (hi - lo)) > 1e-12 * std::max(1.0, hi - lo)) {
    throw DimensionError("grid: spacing " + std::to_string(h) +
                         " does not divide the extent into whole cells");
  }
  GridSpec grid{dimension, static_cast<int>(rounded) + 1, lo, hi};
  grid.validate();
  return grid;
}

void GridSpec::validate() const {
  if (dimension != 1 && dimension != 2) {
    throw DimensionError("grid: dimension must be 1 or 2");
  }
  if (nodes < 3) throw DimensionError("grid: need at least 3 nodes per axis");
  if (!(hi > lo)) throw DimensionError("grid: need hi > lo");
}

Vector trapezoid_weights(const GridSpec& grid) {
  grid.validate();
  const double h = grid.spacing();
  Vector axis = Vector::Constant(grid.nodes, h);
  axis[0] = axis[grid.nodes - 1] = 0.5 * h;
  if (grid.dimension == 1) return axis;
  Vector w(grid.size());
  for (int iy = 0; iy < grid.nodes; ++iy) {
    for (int ix = 0; ix < grid.nodes; ++ix) w[iy * grid.nodes + ix] = axis[iy] * axis[ix];
  }
  return w;
}

Matrix node_coordinates(const GridSpec& grid) {
  grid.validate();
  Matrix xy(grid.size(), grid.dimension);
  if (grid.dimension == 1) {
    for (int i = 0; i < grid.nodes; ++i) xy(i, 0) = grid.coordinate(i);
    return xy;
  }
  for (int iy = 0; iy < grid.nodes; ++iy) {
    for (int ix = 0; ix < grid.nodes; ++ix) {
      xy(iy * grid.nodes + ix, 0) = grid.coordinate(ix);
      xy(iy * grid.nodes + ix, 1) = grid.coordinate(iy);
    }
  }
  return xy;
}

// ---------------------------------------------------------------------------
// Coefficients and sources

CoefficientField CoefficientField::background(const GridSpec& grid, EquationKind kind) {
  const double value = kind == EquationKind::schrodinger ? 0.0 : 1.0;
  return {kind, Vector::Constant(grid.size(), value)};
}

Vector CoefficientField::contrast() const {
  if (kind == EquationKind::schrodinger) return values;
  return values.array() - 1.0;
}

SourceSet SourceSet::at_nodes(const GridSpec& grid, std::vector<Eigen::Index> nodes) {
  const Vector w = trapezoid_weights(grid);
  SourceSet set;
  set.values = Matrix::Zero(grid.size(), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    if (nodes[r] < 0 || nodes[r] >= grid.size()) {
      throw DimensionError("source node " + std::to_string(nodes[r]) + " is outside the grid");
    }
    set.values(nodes[r], static_cast<Eigen::Index>(r)) = 1.0 / w[nodes[r]];
  }
  set.nodes = std::move(nodes);
  return set;
}

SourceSet SourceSet::origin(const GridSpec& grid) {
  if (grid.dimension != 1) throw DimensionError("origin source layout requires a 1D grid");
  return at_nodes(grid, {0});
}

SourceSet SourceSet::boundary_pairs(const GridSpec& grid) {
  if (grid.dimension != 2) throw DimensionError("boundary_pairs layout requires a 2D grid");
  const int last = grid.nodes - 1;
  const int a = static_cast<int>(std::lround(last / 3.0));
  const int b = last - a;
  const auto node = [&](int ix, int iy) { return Eigen::Index{iy} * grid.nodes + ix; };
  return at_nodes(grid, {node(a, 0), node(b, 0), node(last, a), node(last, b), node(b, last),
                         node(a, last), node(0, b), node(0, a)});
}

// ---------------------------------------------------------------------------
// Operators

namespace {

/// Quadrature-weighted 1D Neumann stiffness: ghost-node reflection times the
/// trapezoid weights gives (1/h) tridiag(-1, 2, -1) with 1/h in both corners.
std::vector<Eigen::Triplet<double>> stiffness_1d(int n, double h) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (int i = 0; i < n; ++i) {
    const bool boundary = i == 0 || i == n - 1;
    t.emplace_back(i, i, (boundary ? 1.0 : 2.0) / h);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0 / h);
      t.emplace_back(i + 1, i, -1.0 / h);
    }
  }
  return t;
}

}  // namespace

DiscreteOperator assemble_operator(const GridSpec& grid, const CoefficientField& field) {
  grid.validate();
  if (field.values.size() != grid.size()) {
    throw DimensionError("assemble_operator: coefficient has " +
                         std::to_string(field.values.size()) + " values, grid has " +
                         std::to_string(grid.size()) + " nodes");
  }
  if (!field.values.allFinite()) throw CoefficientError("assemble_operator: non-finite coefficient");
  if (field.kind == EquationKind::helmholtz && !(field.values.minCoeff() > 0.0)) {
    throw CoefficientError("assemble_operator: Helmholtz index must be positive everywhere");
  }

  DiscreteOperator op;
  op.grid = grid;
  op.kind = field.kind;
  op.weights = trapezoid_weights(grid);

  const int n = grid.nodes;
  const double h = grid.spacing();
  const auto line = stiffness_1d(n, h);
  std::vector<Eigen::Triplet<double>> t;
  if (grid.dimension == 1) {
    t = line;
  } else {
    // K2 = Kx (x) Wy + Wx (x) Ky on the x-fastest numbering.
    Vector axis = Vector::Constant(n, h);
    axis[0] = axis[n - 1] = 0.5 * h;
    t.reserve(line.size() * static_cast<std::size_t>(2 * n));
    for (const auto& e : line) {
      for (int k = 0; k < n; ++k) {
        t.emplace_back(k * n + e.row(), k * n + e.col(), e.value() * axis[k]);
        t.emplace_back(e.row() * n + k, e.col() * n + k, e.value() * axis[k]);
      }
    }
  }
  if (field.kind == EquationKind::schrodinger) {
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      if (field.values[i] != 0.0) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(i), op.weights[i] * field.values[i]);
      }
    }
    op.mass = op.weights;
  } else {
    op.mass = op.weights.cwiseProduct(field.values);
  }
  op.stiffness.resize(grid.size(), grid.size());
  op.stiffness.setFromTriplets(t.begin(), t.end());
  op.stiffness.makeCompressed();
  return op;
}

// ---------------------------------------------------------------------------
// Shifted solves

struct ShiftedSolver::Impl {
  SparseMatrix system;
  Eigen::SimplicialLDLT<SparseMatrix> factor;
};

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op, double lambda)
    : impl_(std::make_unique<Impl>()), lambda_(lambda) {
  if (!(lambda > 0.0)) {
    throw DimensionError("resolvent: spectral point must be positive, got " +
                         std::to_string(lambda));
  }
  SparseMatrix diag(op.mass.size(), op.mass.size());
  diag.reserve(Eigen::VectorXi::Constant(op.mass.size(), 1));
  for (Eigen::Index i = 0; i < op.mass.size(); ++i) diag.insert(i, i) = lambda * op.mass[i];
  impl_->system = op.stiffness + diag;
  impl_->factor.compute(impl_->system);
  if (impl_->factor.info() != Eigen::Success) {
    throw SingularError("resolvent: factorization failed at lambda = " + std::to_string(lambda));
  }
}

ShiftedSolver::~ShiftedSolver() = default;
ShiftedSolver::ShiftedSolver(ShiftedSolver&&) noexcept = default;
ShiftedSolver& ShiftedSolver::operator=(ShiftedSolver&&) noexcept = default;

Matrix ShiftedSolver::solve_weighted(const Matrix& rhs) const {
  Matrix x = impl_->factor.solve(rhs);
  const Matrix residual = rhs - impl_->system * x;
  x += impl_->factor.solve(residual);
  return x;
}

Matrix solve_resolvent(const DiscreteOperator& op, double lambda, const SourceSet& sources) {
  if (sources.values.rows() != op.grid.size()) {
    throw DimensionError("solve_resolvent: sources do not match the grid");
  }
  const ShiftedSolver solver(op, lambda);
  return solver.solve_weighted(op.weights.asDiagonal() * sources.values);
}

Matrix transfer_function(const SourceSet& sources, const Matrix& u, const Vector& weights) {
  return kernels::parallel::weighted_gram(sources.values, weights, u);
}

Matrix transfer_derivative(const Matrix& u, const DiscreteOperator& op) {
  return -kernels::parallel::weighted_gram(u, op.mass, u);
}

Matrix solve_snapshots(const DiscreteOperator& op, const std::vector<double>& lambdas,
                       const SourceSet& sources) {
  if (sources.values.rows() != op.grid.size()) {
    throw DimensionError("solve_snapshots: sources do not match the grid");
  }
  const Matrix rhs = op.weights.asDiagonal() * sources.values;
  return kernels::parallel::shifted_solves(op, lambdas, rhs);
}

// ---------------------------------------------------------------------------
// Datasets

void TransferDataset::validate() const {
  grid.validate();
  if (lambdas.empty()) throw DimensionError("dataset: no spectral points");
  if (values.size() != lambdas.size() || derivatives.size() != lambdas.size()) {
    throw DimensionError("dataset: block count does not match the number of spectral points");
  }
  const Eigen::Index k = values.front().rows();
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (values[j].rows() != k || values[j].cols() != k || derivatives[j].rows() != k ||
        derivatives[j].cols() != k) {
      throw DimensionError("dataset: inconsistent block shape at point " + std::to_string(j));
    }
    if (!(lambdas[j] > 0.0)) throw DimensionError("dataset: spectral points must be positive");
    if (j > 0 && !(lambdas[j] > lambdas[j - 1])) {
      throw DimensionError("dataset: spectral points must be strictly increasing");
    }
  }
}

TransferDataset generate_dataset(const GridSpec& grid, const CoefficientField& field,
                                 const std::vector<double>& lambdas, const SourceSet& sources) {
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(lambdas[j] > 0.0) || (j > 0 && !(lambdas[j] > lambdas[j - 1]))) {
      throw DimensionError("generate_dataset: spectral points must be positive and increasing");
    }
  }
  const DiscreteOperator op = assemble_operator(grid, field);
  const Matrix snapshots = solve_snapshots(op, lambdas, sources);
  const Eigen::Index k = sources.count();

  TransferDataset data;
  data.kind = field.kind;
  data.grid = grid;
  data.lambdas = lambdas;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const Matrix u = snapshots.middleCols(static_cast<Eigen::Index>(j) * k, k);
    data.values.push_back(transfer_function(sources, u, op.weights));
    data.derivatives.push_back(transfer_derivative(u, op));
  }
  return data;
}

TransferDataset add_noise(const TransferDataset& clean, const TransferDataset& background,
                          double percent, std::uint64_t seed) {
  clean.validate();
  background.validate();
  if (clean.lambdas != background.lambdas || clean.block_size() != background.block_size()) {
    throw DimensionError("add_noise: datasets have different spectral points or block sizes");
  }
  if (!(percent >= 0.0)) throw DimensionError("add_noise: percent must be nonnegative");

  TransferDataset noisy = clean;
  noisy.noise = {percent, seed};
  if (percent == 0.0) return noisy;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double scale = percent / 100.0;
  const auto perturb = [&](Matrix& block, const Matrix& clean_block, const Matrix& reference) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        block(i, c) += unit(rng) * scale * std::abs(reference(i, c) - clean_block(i, c));
      }
    }
    block = 0.5 * (block + block.transpose()).eval();
  };
  for (std::size_t j = 0; j < clean.lambdas.size(); ++j) {
    perturb(noisy.values[j], clean.values[j], background.values[j]);
  }
  for (std::size_t j = 0; j < clean.lambdas.size(); ++j) {
    perturb(noisy.derivatives[j], clean.derivatives[j], background.derivatives[j]);
  }
  return noisy;
}

}  // namespace reglsl
