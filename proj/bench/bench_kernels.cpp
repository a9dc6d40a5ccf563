// Serial reference vs OpenMP kernels. Thread count follows LSL_NUM_THREADS.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "reglsl/kernels.hpp"

using namespace reglsl;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

// 51 x 51 grid with 8 sources at 7 spectral points, as in the 2D experiments.
struct Inputs {
  Matrix left = random_matrix(2601, 56, 1);
  Matrix right = random_matrix(2601, 56, 2);
  Vector weights = random_matrix(2601, 1, 3).cwiseAbs();
  std::vector<kernels::RowSpec> rows;

  Inputs() {
    for (Eigen::Index j = 0; j < 7; ++j) {
      for (Eigen::Index r = 0; r < 8; ++r) {
        for (Eigen::Index s = r; s < 8; ++s) rows.push_back({j * 8 + r, j * 8 + s, 1.0});
      }
    }
  }
};

const Inputs& inputs() {
  static const Inputs in;
  return in;
}

template <auto Kernel>
void row_products(benchmark::State& state) {
  const Inputs& in = inputs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(in.left, in.right, in.weights, in.rows));
  }
}

template <auto Kernel>
void gram(benchmark::State& state) {
  const Inputs& in = inputs();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.left, in.weights, in.right));
}

template <auto Kernel>
void solves(benchmark::State& state) {
  const GridSpec grid = GridSpec::from_spacing(2, -1.0, 1.0, 0.04);
  const DiscreteOperator op =
      assemble_operator(grid, CoefficientField::background(grid, EquationKind::schrodinger));
  const SourceSet src = SourceSet::boundary_pairs(grid);
  const Matrix rhs = op.weights.asDiagonal() * src.values;
  const std::vector<double> lambdas{2, 4, 6, 8, 16, 32, 48};
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(op, lambdas, rhs));
}

}  // namespace

BENCHMARK(row_products<kernels::serial::weighted_row_products>)->Name("row_products/serial");
BENCHMARK(row_products<kernels::parallel::weighted_row_products>)->Name("row_products/parallel");
BENCHMARK(gram<kernels::serial::weighted_gram>)->Name("weighted_gram/serial");
BENCHMARK(gram<kernels::parallel::weighted_gram>)->Name("weighted_gram/parallel");
BENCHMARK(solves<kernels::serial::shifted_solves>)->Name("shifted_solves/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(solves<kernels::parallel::shifted_solves>)->Name("shifted_solves/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
