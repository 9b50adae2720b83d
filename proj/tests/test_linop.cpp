#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pdl/errors.hpp"
#include "pdl/linop.hpp"

using namespace pdl;

namespace {

Vec randn(std::mt19937_64& eng, Index n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(eng);
  return v;
}

void check_adjoint(const LinearMap& K, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  for (int t = 0; t < 100; ++t) {
    const Vec x = randn(eng, K.in_dim()), y = randn(eng, K.out_dim());
    const double a = K(x).dot(y), b = x.dot(K.adjoint(y));
    REQUIRE(std::abs(a - b) <= 1e-10 * std::max(1.0, K(x).norm() * y.norm()));
  }
}

// Dense matrix of a LinearMap, column by column.
Mat densify(const LinearMap& K) {
  Mat A(K.out_dim(), K.in_dim());
  for (Index j = 0; j < K.in_dim(); ++j) A.col(j) = K(Vec::Unit(K.in_dim(), j));
  return A;
}

}  // namespace

TEST_CASE("scalar_map") {
  const LinearMap K = scalar_map(1.5);
  CHECK(K(Vec::Constant(1, 2.0))[0] == 3.0);
  CHECK(K.adjoint(Vec::Constant(1, 2.0))[0] == 3.0);
  CHECK(K.norm() == 1.5);
  CHECK(scalar_map(0.0).norm() == 0.0);
  CHECK(power_iteration_norm(scalar_map(1.5), 5, 1) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(power_iteration_norm(scalar_map(0.0), 5, 1) == 0.0);
}

TEST_CASE("diff_pair") {
  const LinearMap K = diff_pair();
  CHECK(K((Vec(2) << 1.0, 3.0).finished())[0] == 2.0);
  const Vec a = K.adjoint(Vec::Constant(1, 1.0));
  CHECK(a[0] == -1.0);
  CHECK(a[1] == 1.0);
  CHECK(std::abs(power_iteration_norm(K, 50, 9) - std::sqrt(2.0)) < 1e-8);
  check_adjoint(K, 1);
}

TEST_CASE("grad2d") {
  const LinearMap G = grad2d(5, 4);
  CHECK(G(Vec::Constant(20, 0.37)).norm() == 0.0);
  check_adjoint(G, 2);
  // 2x1 image: only the first horizontal difference is nonzero.
  const LinearMap g21 = grad2d(2, 1);
  const Vec out = g21((Vec(2) << 1.0, 3.0).finished());
  CHECK(out[0] == 2.0);
  CHECK(out.tail(3).isZero());
  CHECK(densify(g21).row(0) == densify(diff_pair()).row(0));
  // Adjoint is the negative divergence of a field: sums to zero.
  std::mt19937_64 eng(3);
  CHECK(std::abs(G.adjoint(randn(eng, 40)).sum()) < 1e-12);
}

TEST_CASE("grad2d norm against dense SVD") {
  const LinearMap G = grad2d(32, 32);
  const double est = power_iteration_norm(G, kDefaultPowerIters, kDefaultPowerSeed);
  Eigen::SelfAdjointEigenSolver<Mat> es(densify(G).transpose() * densify(G), Eigen::EigenvaluesOnly);
  const double exact = std::sqrt(es.eigenvalues().maxCoeff());
  CHECK(exact <= std::sqrt(8.0) + 1e-9);
  CHECK(est <= exact + 1e-9);
  CHECK(est >= 2.7);
  CHECK(est <= std::sqrt(8.0) + 1e-6);
  CHECK(G.norm() == doctest::Approx(est));
}

TEST_CASE("power iteration is monotone in iters") {
  const LinearMap G = grad2d(9, 7);
  double prev = 0.0;
  for (int it = 1; it <= 60; ++it) {
    const double v = power_iteration_norm(G, it, 42);
    REQUIRE(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(power_iteration_norm(G, 0, 1), DomainError);
}

TEST_CASE("sym_grad2d") {
  const LinearMap E = sym_grad2d(6, 5);
  CHECK(E.in_dim() == 60);
  CHECK(E.out_dim() == 90);
  CHECK(E(Vec::Zero(60)).isZero());
  Vec c(60);
  for (Index p = 0; p < 30; ++p) c[2 * p] = 0.4, c[2 * p + 1] = -1.3;
  CHECK(E(c).norm() == 0.0);
  check_adjoint(E, 4);
  // A linear field v = (a*col, b*row) has E = diag(a, b) in the interior.
  Vec lin(60);
  for (Index r = 0; r < 5; ++r)
    for (Index cc = 0; cc < 6; ++cc) lin[2 * (r * 6 + cc)] = 0.5 * cc, lin[2 * (r * 6 + cc) + 1] = 2.0 * r;
  const Vec e = E(lin);
  const Index p = 2 * 6 + 3;
  CHECK(e[3 * p] == doctest::Approx(0.5));
  CHECK(e[3 * p + 1] == doctest::Approx(2.0));
  CHECK(e[3 * p + 2] == doctest::Approx(0.0));
}

TEST_CASE("tgv_block") {
  const Index w = 5, h = 4, n = w * h;
  const LinearMap E = sym_grad2d(w, h);
  const LinearMap K = tgv_block(w, h, E);
  CHECK(K.in_dim() == 3 * n);
  CHECK(K.out_dim() == 5 * n);
  Vec x = Vec::Zero(3 * n);
  x.head(n).setConstant(0.8);
  CHECK(K(x).isZero());
  check_adjoint(K, 5);
  CHECK(std::isfinite(K.norm()));
  CHECK(K.norm() >= grad2d(w, h).norm() - 1e-9);
  CHECK_THROWS_AS(tgv_block(w + 1, h, E), DimensionError);
}

TEST_CASE("dense_map and dimension errors") {
  Mat A(2, 3);
  A << 1, 2, 3, 4, 5, 6;
  const LinearMap K = dense_map(A);
  check_adjoint(K, 6);
  Eigen::JacobiSVD<Mat> svd(A);
  CHECK(K.norm() == doctest::Approx(svd.singularValues()[0]).epsilon(1e-10));
  CHECK_THROWS_AS(K(Vec::Zero(2)), DimensionError);
  CHECK_THROWS_AS(K.adjoint(Vec::Zero(3)), DimensionError);
}
