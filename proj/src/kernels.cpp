#include "reglsl/kernels.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

#include "reglsl/error.hpp"

namespace reglsl::kernels {

namespace {

int& configured_threads() {
  static int threads = [] {
    if (const char* env = std::getenv("LSL_NUM_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return omp_get_max_threads();
  }();
  return threads;
}

void check_row_inputs(const Matrix& left, const Matrix& right, const Vector& weights,
                      std::span<const RowSpec> rows) {
  if (left.rows() != weights.size() || right.rows() != weights.size()) {
    throw DimensionError("weighted_row_products: snapshot rows do not match the grid size");
  }
  for (const RowSpec& row : rows) {
    if (row.left_col < 0 || row.left_col >= left.cols() || row.right_col < 0 ||
        row.right_col >= right.cols()) {
      throw DimensionError("weighted_row_products: column index out of range");
    }
  }
}

void check_gram_inputs(const Matrix& a, const Vector& d, const Matrix& b) {
  if (a.rows() != d.size() || b.rows() != d.size()) {
    throw DimensionError("weighted_gram: inconsistent row counts");
  }
}

inline double weighted_dot(const Matrix& a, Eigen::Index i, const Vector& d, const Matrix& b,
                           Eigen::Index j) {
  const double* x = a.col(i).data();
  const double* y = b.col(j).data();
  const double* w = d.data();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) sum += x[k] * w[k] * y[k];
  return sum;
}

inline void fill_row(Matrix& out, Eigen::Index k, const Matrix& left, const Matrix& right,
                     const Vector& weights, const RowSpec& row) {
  const double* l = left.col(row.left_col).data();
  const double* r = right.col(row.right_col).data();
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    out(k, i) = row.scale * weights[i] * l[i] * r[i];
  }
}

void check_solve_inputs(const DiscreteOperator& op, const Matrix& rhs) {
  if (rhs.rows() != op.grid.size()) {
    throw DimensionError("shifted_solves: right-hand side does not match the grid size");
  }
}

}  // namespace

int thread_count() { return configured_threads(); }

void set_thread_count(int threads) { configured_threads() = threads > 0 ? threads : 1; }

namespace serial {

Matrix weighted_row_products(const Matrix& left, const Matrix& right, const Vector& weights,
                             std::span<const RowSpec> rows) {
  check_row_inputs(left, right, weights, rows);
  Matrix out(static_cast<Eigen::Index>(rows.size()), weights.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    fill_row(out, static_cast<Eigen::Index>(k), left, right, weights, rows[k]);
  }
  return out;
}

Matrix weighted_gram(const Matrix& a, const Vector& d, const Matrix& b) {
  check_gram_inputs(a, d, b);
  Matrix out(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) out(i, j) = weighted_dot(a, i, d, b, j);
  }
  return out;
}

Matrix shifted_solves(const DiscreteOperator& op, std::span<const double> lambdas,
                      const Matrix& rhs) {
  check_solve_inputs(op, rhs);
  const Eigen::Index k = rhs.cols();
  Matrix out(rhs.rows(), static_cast<Eigen::Index>(lambdas.size()) * k);
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const ShiftedSolver solver(op, lambdas[j]);
    out.middleCols(static_cast<Eigen::Index>(j) * k, k) = solver.solve_weighted(rhs);
  }
  return out;
}

}  // namespace serial

namespace parallel {

Matrix weighted_row_products(const Matrix& left, const Matrix& right, const Vector& weights,
                             std::span<const RowSpec> rows) {
  check_row_inputs(left, right, weights, rows);
  Matrix out(static_cast<Eigen::Index>(rows.size()), weights.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    fill_row(out, k, left, right, weights, rows[static_cast<std::size_t>(k)]);
  }
  return out;
}

Matrix weighted_gram(const Matrix& a, const Vector& d, const Matrix& b) {
  check_gram_inputs(a, d, b);
  Matrix out(a.cols(), b.cols());
  const Eigen::Index rows = a.cols();
  const Eigen::Index total = a.cols() * b.cols();
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    const Eigen::Index i = idx % rows;
    const Eigen::Index j = idx / rows;
    out(i, j) = weighted_dot(a, i, d, b, j);
  }
  return out;
}

Matrix shifted_solves(const DiscreteOperator& op, std::span<const double> lambdas,
                      const Matrix& rhs) {
  check_solve_inputs(op, rhs);
  const Eigen::Index k = rhs.cols();
  Matrix out(rhs.rows(), static_cast<Eigen::Index>(lambdas.size()) * k);
  const auto m = static_cast<std::ptrdiff_t>(lambdas.size());
  // Exceptions may not escape an OpenMP region.
  std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    try {
      const ShiftedSolver solver(op, lambdas[static_cast<std::size_t>(j)]);
      out.middleCols(j * k, k) = solver.solve_weighted(rhs);
    } catch (const std::exception& e) {
#pragma omp critical(reglsl_shifted_solves)
      failure = e.what();
    }
  }
  if (!failure.empty()) throw SingularError(failure);
  return out;
}

}  // namespace parallel

}  // namespace reglsl::kernels
