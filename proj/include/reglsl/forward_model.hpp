#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace reglsl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class EquationKind { schrodinger, helmholtz };

std::string_view to_string(EquationKind kind);
EquationKind parse_equation_kind(std::string_view text);

/// Uniform tensor grid on [lo, hi] (1D) or [lo, hi]^2 (2D). Nodes include both
/// endpoints; 2D nodes are numbered x-fastest: index = iy * nodes + ix.
struct GridSpec {
  int dimension = 1;
  int nodes = 3;
  double lo = 0.0;
  double hi = 1.0;

  double spacing() const { return (hi - lo) / (nodes - 1); }
  Eigen::Index size() const {
    return dimension == 1 ? Eigen::Index{nodes} : Eigen::Index{nodes} * nodes;
  }
  /// Coordinate of node `i` along one axis.
  double coordinate(int i) const { return lo + i * spacing(); }

  /// Grid with the given spacing; throws DimensionError unless the spacing
  /// divides [lo, hi] into an integer number of cells (within 1e-12).
  static GridSpec from_spacing(int dimension, double lo, double hi, double h);
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Trapezoid quadrature weights: h per interior node and h/2 on the boundary
/// (tensor products thereof in 2D).
Vector trapezoid_weights(const GridSpec& grid);

/// Node coordinates as a size() x dimension matrix.
Matrix node_coordinates(const GridSpec& grid);

/// p(x) for the Schrödinger equation or n(x) for the Helmholtz equation.
struct CoefficientField {
  EquationKind kind = EquationKind::schrodinger;
  Vector values;

  static CoefficientField background(const GridSpec& grid, EquationKind kind);
  /// p for Schrödinger, n - 1 for Helmholtz.
  Vector contrast() const;
};

/// K discrete point sources of unit discrete integral: g^(r) = e_node / w_node.
struct SourceSet {
  std::vector<Eigen::Index> nodes;
  Matrix values;  // size() x K

  int count() const { return static_cast<int>(nodes.size()); }

  static SourceSet at_nodes(const GridSpec& grid, std::vector<Eigen::Index> nodes);
  /// Single source at x = lo (1D).
  static SourceSet origin(const GridSpec& grid);
  /// Two sources per edge of the 2D box, at the nodes nearest to the 1/3 and
  /// 2/3 points of each edge (bottom, right, top, left).
  static SourceSet boundary_pairs(const GridSpec& grid);
};

/// Quadrature-weighted finite-difference operators. The resolvent equation at
/// spectral point lambda reads (stiffness + lambda * diag(mass)) u = diag(w) g,
/// where `stiffness` = diag(w)(-Laplacian_h + p) (Schrödinger) or
/// diag(w)(-Laplacian_h) (Helmholtz) and `mass` = w (Schrödinger) or w * n
/// (Helmholtz). Both are exactly symmetric.
struct DiscreteOperator {
  GridSpec grid;
  EquationKind kind = EquationKind::schrodinger;
  SparseMatrix stiffness;
  Vector mass;
  Vector weights;
};

DiscreteOperator assemble_operator(const GridSpec& grid, const CoefficientField& field);

/// Factorization of stiffness + lambda * diag(mass) with one step of
/// iterative refinement on every solve.
class ShiftedSolver {
 public:
  ShiftedSolver(const DiscreteOperator& op, double lambda);
  ~ShiftedSolver();
  ShiftedSolver(ShiftedSolver&&) noexcept;
  ShiftedSolver& operator=(ShiftedSolver&&) noexcept;

  /// Solves the weighted system for a right-hand side that is already
  /// multiplied by the quadrature weights.
  Matrix solve_weighted(const Matrix& rhs) const;
  double lambda() const { return lambda_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double lambda_;
};

/// U(lambda): solutions for every source, size() x K.
Matrix solve_resolvent(const DiscreteOperator& op, double lambda, const SourceSet& sources);

/// F = G^T diag(w) U.
Matrix transfer_function(const SourceSet& sources, const Matrix& u, const Vector& weights);

/// dF/dlambda = -U^T diag(mass) U (exact resolvent-derivative identity).
Matrix transfer_derivative(const Matrix& u, const DiscreteOperator& op);

struct NoiseInfo {
  double percent = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const NoiseInfo&) const = default;
};

/// Transfer-function samples F(lambda_j) and dF/dlambda(lambda_j), j = 1..m.
struct TransferDataset {
  EquationKind kind = EquationKind::schrodinger;
  GridSpec grid;
  std::vector<double> lambdas;
  std::vector<Matrix> values;       // F blocks, K x K
  std::vector<Matrix> derivatives;  // dF blocks, K x K
  NoiseInfo noise;

  int block_size() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
  int points() const { return static_cast<int>(lambdas.size()); }
  void validate() const;
};

/// Solutions at every (lambda_j, r), spectral-point-major: column j*K + r.
Matrix solve_snapshots(const DiscreteOperator& op, const std::vector<double>& lambdas,
                       const SourceSet& sources);

TransferDataset generate_dataset(const GridSpec& grid, const CoefficientField& field,
                                 const std::vector<double>& lambdas, const SourceSet& sources);

/// Adds seeded uniform noise: every entry of F (resp. dF) is perturbed by
/// u * (percent/100) * |F0 - F| with u ~ U[-1,1], then re-symmetrized.
TransferDataset add_noise(const TransferDataset& clean, const TransferDataset& background,
                          double percent, std::uint64_t seed);

}  // namespace reglsl
