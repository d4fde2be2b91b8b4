#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "wavesel/quadrature.hpp"

using namespace wavesel;

namespace {

// Design with an intercept column and two fixed smooth covariates (x, y).
Eigen::MatrixXd coord_design(const QuadratureScheme& scheme) {
  Eigen::MatrixXd Z(scheme.M(), 3);
  for (int m = 0; m < scheme.M(); ++m) {
    Z(m, 0) = 1.0;
    Z(m, 1) = scheme.nodes[static_cast<std::size_t>(m)].x;
    Z(m, 2) = scheme.nodes[static_cast<std::size_t>(m)].y;
  }
  return Z;
}

QuadratureScheme random_scheme(std::uint64_t seed, int n, int qx, int qy,
                               Window w = Window::unit()) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(w.x0, w.x1), uy(w.y0, w.y1);
  PointPattern p;
  p.window = w;
  for (int i = 0; i < n; ++i) p.points.push_back({ux(rng), uy(rng)});
  return build_quadrature(p, w, qx, qy);
}

}  // namespace

TEST_CASE("weights are positive, tile-exact, and sum to the window area") {
  const Window w{-1.0, 3.0, 2.0, 4.5};
  const QuadratureScheme s = random_scheme(1, 23, 7, 5, w);
  REQUIRE(s.M() == 23 + 35);
  CHECK(s.n_data == 23);
  for (int m = 0; m < s.M(); ++m) CHECK(s.weights[m] > 0.0);
  CHECK(s.weights.sum() == doctest::Approx(w.area()).epsilon(1e-12));
  // Data nodes first (in input order), then dummies.
  for (int m = 0; m < s.M(); ++m)
    CHECK(s.labels[static_cast<std::size_t>(m)] == (m < 23 ? 1 : 0));
}

TEST_CASE("2x2 worked example: tile area splits over its nodes") {
  PointPattern p;
  p.points.push_back({0.1, 0.1});
  const QuadratureScheme s = build_quadrature(p, Window::unit(), 2, 2);
  REQUIRE(s.M() == 5);
  // The data point shares tile [0,.5)^2 with the dummy at (0.25, 0.25):
  // each gets 0.25 / 2.  The other three dummies keep their full tiles.
  CHECK(s.weights[0] == doctest::Approx(0.125).epsilon(1e-15));
  int shared = 0;
  for (int m = 1; m < 5; ++m) {
    const Point d = s.nodes[static_cast<std::size_t>(m)];
    if (d.x == 0.25 && d.y == 0.25) {
      CHECK(s.weights[m] == doctest::Approx(0.125).epsilon(1e-15));
      ++shared;
    } else {
      CHECK(s.weights[m] == doctest::Approx(0.25).epsilon(1e-15));
    }
  }
  CHECK(shared == 1);
}

TEST_CASE("duplicated data points are kept as separate nodes") {
  PointPattern p;
  p.points.push_back({0.1, 0.1});
  p.points.push_back({0.1, 0.1});
  const QuadratureScheme s = build_quadrature(p, Window::unit(), 2, 2);
  REQUIRE(s.M() == 6);
  CHECK(s.n_data == 2);
  // Tile [0,.5)^2 now holds 3 nodes: 0.25 / 3 each.
  CHECK(s.weights[0] == doctest::Approx(0.25 / 3.0).epsilon(1e-14));
  CHECK(s.weights[1] == doctest::Approx(0.25 / 3.0).epsilon(1e-14));
  CHECK(s.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("null model log-likelihood equals minus the window area") {
  const QuadratureScheme s = random_scheme(2, 10, 4, 4);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(s.M(), 1);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  CHECK(bt_loglik(zero, ones, s) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("offsets reproduce the offset-GLM form of the likelihood") {
  const QuadratureScheme s = random_scheme(3, 12, 5, 5);
  const Eigen::MatrixXd Z = coord_design(s);
  Eigen::VectorXd beta(3);
  beta << 0.7, -0.4, 1.1;
  const Eigen::VectorXd eta = Z * beta;
  const Eigen::VectorXd off = s.offsets();
  double glm = 0.0;
  for (int m = 0; m < s.M(); ++m) {
    const double y = s.labels[static_cast<std::size_t>(m)] ? 1.0 : 0.0;
    glm += y * eta[m] - std::exp(eta[m] + off[m]);
  }
  // bt_loglik sums y*eta - w*exp(eta); the offset form folds w into eta.
  CHECK(glm == doctest::Approx(bt_loglik(beta, Z, s)).epsilon(1e-12));
}

TEST_CASE("score and Hessian match finite differences") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 0.3);
  for (int inst = 0; inst < 5; ++inst) {
    const QuadratureScheme s = random_scheme(100 + static_cast<std::uint64_t>(inst), 10, 4, 4);
    const Eigen::MatrixXd Z = coord_design(s);
    Eigen::VectorXd beta(3);
    for (int j = 0; j < 3; ++j) beta[j] = gauss(rng);

    const Eigen::VectorXd g = bt_score(beta, Z, s);
    const Eigen::MatrixXd H = bt_hessian(beta, Z, s);
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd up = beta, dn = beta;
      up[j] += h;
      dn[j] -= h;
      const double fd = (bt_loglik(up, Z, s) - bt_loglik(dn, Z, s)) / (2 * h);
      CHECK(std::abs(fd - g[j]) <= 1e-6 * std::max(1.0, std::abs(g[j])));
      const Eigen::VectorXd gfd = (bt_score(up, Z, s) - bt_score(dn, Z, s)) / (2 * h);
      for (int i = 0; i < 3; ++i)
        CHECK(std::abs(gfd[i] - H(i, j)) <= 1e-5 * std::max(1.0, std::abs(H(i, j))));
    }
  }
}

TEST_CASE("Hessian is negative semidefinite") {
  const QuadratureScheme s = random_scheme(4, 15, 5, 5);
  const Eigen::MatrixXd Z = coord_design(s);
  Eigen::VectorXd beta(3);
  beta << 1.0, 0.5, -0.8;
  const Eigen::MatrixXd H = bt_hessian(beta, Z, s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  CHECK(eig.eigenvalues().maxCoeff() <= 1e-10);
}

TEST_CASE("BT integral term converges to the exact integral") {
  // Intensity exp(c + a x + b y) on the unit square has the closed form
  // integral e^c (e^a - 1)/a (e^b - 1)/b.
  const double c = 4.0, a = 1.0, b = -0.7;
  const double exact = std::exp(c) * (std::exp(a) - 1.0) / a * (std::exp(b) - 1.0) / b;
  PointPattern empty;
  double prev = std::numeric_limits<double>::infinity();
  for (int q : {8, 16, 32, 64}) {
    const QuadratureScheme s = build_quadrature(empty, Window::unit(), q, q);
    const Eigen::MatrixXd Z = coord_design(s);
    Eigen::VectorXd beta(3);
    beta << c, a, b;
    const double integral = -bt_loglik(beta, Z, s);  // no data terms
    const double rel = std::abs(integral - exact) / exact;
    CHECK(rel < prev);
    prev = rel;
    if (q == 64) CHECK(rel < 0.01);
  }
}

TEST_CASE("argument validation") {
  PointPattern p;
  p.points.push_back({0.5, 0.5});
  CHECK_THROWS_AS(build_quadrature(p, Window::unit(), 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_quadrature(p, Window{1, 1, 0, 1}, 2, 2), std::invalid_argument);
  PointPattern outside;
  outside.points.push_back({1.5, 0.5});
  CHECK_THROWS_AS(build_quadrature(outside, Window::unit(), 2, 2), std::invalid_argument);

  const QuadratureScheme s = build_quadrature(p, Window::unit(), 2, 2);
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(bt_loglik(one, wrong, s), std::invalid_argument);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(s.M(), 1);
  Eigen::VectorXd huge = Eigen::VectorXd::Constant(1, 701.0);
  CHECK_THROWS_AS(bt_loglik(huge, ones, s), std::overflow_error);
}
