#include <doctest.h>

#include <random>

#include "reglsl/error.hpp"
#include "reglsl/lanczos.hpp"
#include "reglsl/numerics.hpp"

using namespace reglsl;

namespace {

constexpr double kOrthoTol = 1e-10;

struct Pencil {
  Matrix mass;
  Matrix stiffness;
};

// Well-conditioned SPD pencil from a seeded generator.
Pencil random_pencil(Eigen::Index l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(l, l), b(l, l);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (Eigen::Index i = 0; i < l; ++i) {
      a(i, j) = u(rng);
      b(i, j) = u(rng);
    }
  }
  const Matrix id = Matrix::Identity(l, l);
  return {numerics::symmetrized(a * a.transpose() + 0.5 * id),
          numerics::symmetrized(b * b.transpose() + 0.1 * id)};
}

Matrix random_rhs(Eigen::Index l, Eigen::Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix r(l, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < l; ++i) r(i, j) = n(rng);
  }
  return r;
}

double max_dev(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("lanczos") {

TEST_CASE("scalar Lanczos: M-orthonormal basis, tridiagonal T, same spectrum") {
  const Pencil p = random_pencil(9, 3);
  const Vector b = random_rhs(9, 1, 4).col(0);
  const LanczosFactors f = m_symmetric_lanczos(p.mass, p.stiffness, b);
  REQUIRE(f.steps() == 9);
  CHECK_FALSE(f.breakdown);
  const Matrix& q = f.basis;
  CHECK(max_dev(q.transpose() * p.mass * q, Matrix::Identity(9, 9)) < kOrthoTol);
  const Matrix t = q.transpose() * p.stiffness * q;
  CHECK(max_dev(t, f.tridiagonal) < 1e-10 * t.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < 9; ++i) {
    for (Eigen::Index j = 0; j < 9; ++j) {
      if (std::abs(i - j) > 1) CHECK(f.tridiagonal(i, j) == 0.0);
    }
    if (i + 1 < 9) CHECK(f.tridiagonal(i + 1, i) > 0.0);
  }
  const Vector theta = pencil_eigenvalues(p.mass, p.stiffness);
  const Vector eig = numerics::sym_eig(f.tridiagonal).eigenvalues;
  CHECK(max_dev(eig, theta) < 1e-10 * theta[0]);

  // q_1 = M^{-1} b / sqrt(b^T M^{-1} b).
  const Vector minv_b = p.mass.llt().solve(b);
  const double scale = std::sqrt(b.dot(minv_b));
  CHECK(f.start_scale(0, 0) == doctest::Approx(scale));
  CHECK(max_dev(q.col(0), minv_b / scale) < 1e-12);
}

TEST_CASE("scalar Lanczos stops on an invariant subspace") {
  const Matrix mass = Matrix::Identity(4, 4);
  const Matrix stiffness = Vector{{1.0, 2.0, 3.0, 4.0}}.asDiagonal();
  const Vector b{{1.0, 1.0, 0.0, 0.0}};
  const LanczosFactors f = m_symmetric_lanczos(mass, stiffness, b);
  CHECK(f.breakdown);
  CHECK(f.steps() == 2);
}

TEST_CASE("block Lanczos with a narrow final block") {
  const Eigen::Index l = 11, k = 3;  // blocks of width 3, 3, 3, 2
  const Pencil p = random_pencil(l, 8);
  const Matrix b = random_rhs(l, k, 9);
  const LanczosFactors f = block_lanczos(p.mass, p.stiffness, b);
  REQUIRE(f.widths == std::vector<int>{3, 3, 3, 2});
  const Matrix& q = f.basis;
  CHECK(max_dev(q.transpose() * p.mass * q, Matrix::Identity(l, l)) < kOrthoTol);
  CHECK(max_dev(q.transpose() * p.stiffness * q, f.tridiagonal) <
        1e-10 * f.tridiagonal.cwiseAbs().maxCoeff());
  // Block tridiagonal structure and SPD start scale.
  CHECK(f.tridiagonal.block(6, 0, 5, 3).isZero());
  CHECK(numerics::sym_eig(f.start_scale).eigenvalues.minCoeff() > 0.0);
  CHECK(max_dev(f.start_scale * f.start_scale, b.transpose() * p.mass.llt().solve(b)) < 1e-10);
  const Vector theta = pencil_eigenvalues(p.mass, p.stiffness);
  CHECK(max_dev(numerics::sym_eig(f.tridiagonal).eigenvalues, theta) < 1e-10 * theta[0]);
}

TEST_CASE("block Lanczos breakdown and indefinite mass") {
  const Pencil p = random_pencil(6, 1);
  Matrix b = random_rhs(6, 2, 2);
  b.col(1) = 2.0 * b.col(0);
  CHECK_THROWS_AS(block_lanczos(p.mass, p.stiffness, b), BreakdownError);
  Matrix bad = p.mass;
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(m_symmetric_lanczos(bad, p.stiffness, b.col(0)), BreakdownError);
  CHECK_THROWS_AS(m_symmetric_lanczos(p.mass, p.stiffness, Vector::Ones(3)), DimensionError);
}

TEST_CASE("time-domain snapshots span the Lanczos Krylov spaces") {
  const Pencil p = random_pencil(6, 21);
  const Vector b = random_rhs(6, 1, 22).col(0);
  const double tau = stable_time_step(p.mass, p.stiffness);
  const double theta_max = pencil_eigenvalues(p.mass, p.stiffness)[0];
  CHECK(tau * tau * theta_max == doctest::Approx(1.0));
  CHECK(krylov_equivalence_check(p.mass, p.stiffness, b, tau, 6) < 1e-6);
}

}  // TEST_SUITE
