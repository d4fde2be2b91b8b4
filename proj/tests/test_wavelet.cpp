#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "wavesel/wavelet.hpp"

using namespace wavesel;

namespace {

std::vector<Point> dyadic_centers(int n) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) pts.push_back({(ix + 0.5) / n, (iy + 0.5) / n});
  return pts;
}

}  // namespace

TEST_CASE("orientation names round-trip") {
  CHECK(std::string(orientation_name(Orientation::Scaling)) == "SCALING");
  CHECK(std::string(orientation_name(Orientation::H)) == "H");
  CHECK(std::string(orientation_name(Orientation::V)) == "V");
  CHECK(std::string(orientation_name(Orientation::D)) == "D");
  for (auto o : {Orientation::Scaling, Orientation::H, Orientation::V, Orientation::D})
    CHECK(orientation_from_name(orientation_name(o)) == o);
  CHECK_THROWS(orientation_from_name("diagonal"));
}

TEST_CASE("dictionary size and deterministic atom order") {
  HaarBasis b(0, 2);
  REQUIRE(b.size() == 16);
  CHECK(b.j0() == 0);
  CHECK(b.J() == 2);
  // Scaling block first, then levels ascending with H, V, D blocks, each
  // row-major in (k1, k2).
  CHECK(b.atom(0).orientation == Orientation::Scaling);
  CHECK(b.atom(0).j == 0);
  CHECK(b.atom(1).orientation == Orientation::H);
  CHECK(b.atom(1).j == 0);
  CHECK(b.atom(2).orientation == Orientation::V);
  CHECK(b.atom(3).orientation == Orientation::D);
  CHECK(b.atom(4).orientation == Orientation::H);
  CHECK(b.atom(4).j == 1);
  CHECK(b.atom(4).k1 == 0);
  CHECK(b.atom(4).k2 == 0);
  CHECK(b.atom(5).k1 == 0);
  CHECK(b.atom(5).k2 == 1);
  CHECK(b.atom(6).k1 == 1);
  CHECK(b.atom(6).k2 == 0);
  CHECK(b.atom(7).k1 == 1);
  CHECK(b.atom(7).k2 == 1);
  CHECK(b.atom(8).orientation == Orientation::V);
  CHECK(b.atom(8).j == 1);
  CHECK(b.atom(12).orientation == Orientation::D);
  CHECK(b.atom(15).k1 == 1);
  CHECK(b.atom(15).k2 == 1);

  // R = 4^j0 + 3 * sum_{j=j0}^{J-1} 4^j.
  CHECK(HaarBasis(0, 0).size() == 1);
  CHECK(HaarBasis(0, 1).size() == 4);
  CHECK(HaarBasis(0, 3).size() == 64);
  CHECK(HaarBasis(1, 2).size() == 16);
  CHECK(HaarBasis(2, 2).size() == 16);
}

TEST_CASE("frozen atom evaluations") {
  HaarBasis b(0, 2);
  // Scaling atom at j0 = 0 is identically 1 on the unit square.
  CHECK(b.eval_atom(0, {0.25, 0.25}) == 1.0);
  CHECK(b.eval_atom(0, {0.9, 0.1}) == 1.0);
  // H at j = 0: psi(x), +1 on x < 1/2, -1 on x >= 1/2.
  CHECK(b.eval_atom(1, {0.25, 0.25}) == 1.0);
  CHECK(b.eval_atom(1, {0.75, 0.25}) == -1.0);
  // H at j = 1, k = (0,0): 2 * psi(2x) * phi(2y) on [0,1/2)^2.
  const WaveletIndex h1{1, Orientation::H, 0, 0};
  CHECK(b.eval_atom(h1, {0.3, 0.2}) == -2.0);
  CHECK(b.eval_atom(h1, {0.2, 0.2}) == 2.0);
  CHECK(b.eval_atom(h1, {0.75, 0.2}) == 0.0);  // outside the tile
  // Half-open boundary: x = 1 belongs to the last tile.
  const WaveletIndex h1last{1, Orientation::H, 1, 1};
  CHECK(b.eval_atom(h1last, {1.0, 1.0}) == -2.0);
  // Outside the unit square -> 0.
  CHECK(b.eval_atom(0, {1.5, 0.5}) == 0.0);
  CHECK(b.eval_atom(0, {-0.01, 0.5}) == 0.0);
}

TEST_CASE("Gram matrix is the identity on a dyadic grid") {
  for (int J : {1, 2, 3}) {
    HaarBasis b(0, J);
    const int n = 1 << (J + 3);
    const auto pts = dyadic_centers(n);
    Eigen::MatrixXd B = b.basis_matrix(pts);
    Eigen::MatrixXd G = B.transpose() * B / static_cast<double>(n) / n;
    const double err = (G - Eigen::MatrixXd::Identity(b.size(), b.size()))
                           .cwiseAbs()
                           .maxCoeff();
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("pointwise energy sums to 4^J") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int J : {1, 2, 3}) {
    HaarBasis b(0, J);
    for (int i = 0; i < 20; ++i) {
      const Point t{unif(rng), unif(rng)};
      CHECK(b.eval_basis(t).squaredNorm() ==
            doctest::Approx(std::pow(4.0, J)).epsilon(1e-12));
    }
  }
}

TEST_CASE("piecewise-constant surface projects exactly at J=1") {
  // Surface: +1 on [0,.5)^2, -1 on [.5,1]^2, 0 elsewhere.  Its projection
  // onto the J=1 dictionary has coefficients (0, 1/2, 1/2, 0) in atom order
  // (SCALING, H, V, D) and reproduces the surface at dyadic centers.
  auto surface = [](Point t) {
    if (t.x < 0.5 && t.y < 0.5) return 1.0;
    if (t.x >= 0.5 && t.y >= 0.5) return -1.0;
    return 0.0;
  };
  HaarBasis b(0, 1);
  const int n = 16;
  const auto pts = dyadic_centers(n);
  Eigen::VectorXd f(static_cast<int>(pts.size()));
  for (int i = 0; i < f.size(); ++i) f[i] = surface(pts[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd B = b.basis_matrix(pts);
  Eigen::VectorXd coeffs = B.transpose() * f / static_cast<double>(n) / n;

  CHECK(coeffs[0] == 0.0);
  CHECK(coeffs[1] == doctest::Approx(0.5));
  CHECK(coeffs[2] == doctest::Approx(0.5));
  CHECK(coeffs[3] == 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(b.reconstruct(coeffs, pts[i]) - surface(pts[i])) <= 1e-10);
}

TEST_CASE("eval_basis matches eval_atom and basis_matrix") {
  HaarBasis b(1, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Point> pts;
  for (int i = 0; i < 7; ++i) pts.push_back({unif(rng), unif(rng)});
  Eigen::MatrixXd B = b.basis_matrix(pts);
  for (int i = 0; i < 7; ++i) {
    Eigen::VectorXd row = b.eval_basis(pts[static_cast<std::size_t>(i)]);
    for (int r = 0; r < b.size(); ++r) {
      CHECK(B(i, r) == row[r]);
      CHECK(row[r] == b.eval_atom(r, pts[static_cast<std::size_t>(i)]));
    }
  }
}

TEST_CASE("atoms CSV header and first rows") {
  HaarBasis b(0, 1);
  std::ostringstream os;
  b.write_atoms_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "r,j,orientation,k1,k2");
  std::getline(is, line);
  CHECK(line == "1,0,SCALING,0,0");
  std::getline(is, line);
  CHECK(line == "2,0,H,0,0");
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(HaarBasis(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(HaarBasis(2, 1), std::invalid_argument);
  HaarBasis b(0, 1);
  CHECK_THROWS_AS(b.atom(-1), std::out_of_range);
  CHECK_THROWS_AS(b.atom(4), std::out_of_range);
  CHECK_THROWS_AS(b.eval_atom(WaveletIndex{5, Orientation::H, 0, 0}, {0.5, 0.5}),
                  std::out_of_range);
  std::vector<Point> outside{{1.5, 0.5}};
  CHECK_THROWS_AS(b.basis_matrix(outside), std::domain_error);
}
