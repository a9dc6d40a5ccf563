#pragma once

// Data-parallel inner loops of the pipeline. Every kernel exists twice: an
// OpenMP version used by the library and a plain serial reference kept for
// tests and benchmarks. Both versions use the same summation order, so their
// outputs agree bitwise.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "reglsl/forward_model.hpp"

namespace reglsl::kernels {

/// One row of a quadrature-weighted product kernel:
/// out(i) = scale * w(i) * left(i, left_col) * right(i, right_col).
struct RowSpec {
  Eigen::Index left_col = 0;
  Eigen::Index right_col = 0;
  double scale = 1.0;
};

/// Number of OpenMP threads used by the parallel kernels; honours
/// LSL_NUM_THREADS when set.
int thread_count();
void set_thread_count(int threads);

namespace serial {

Matrix weighted_row_products(const Matrix& left, const Matrix& right, const Vector& weights,
                             std::span<const RowSpec> rows);

/// a^T diag(d) b.
Matrix weighted_gram(const Matrix& a, const Vector& d, const Matrix& b);

/// Columns j*K + r hold the solution at lambdas[j] for rhs column r, where
/// `rhs` is already multiplied by the quadrature weights.
Matrix shifted_solves(const DiscreteOperator& op, std::span<const double> lambdas,
                      const Matrix& rhs);

}  // namespace serial

namespace parallel {

Matrix weighted_row_products(const Matrix& left, const Matrix& right, const Vector& weights,
                             std::span<const RowSpec> rows);

Matrix weighted_gram(const Matrix& a, const Vector& d, const Matrix& b);

Matrix shifted_solves(const DiscreteOperator& op, std::span<const double> lambdas,
                      const Matrix& rhs);

}  // namespace parallel

}  // namespace reglsl::kernels
