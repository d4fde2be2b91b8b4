#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "wavesel/geometry.hpp"
#include "wavesel/io.hpp"

using namespace wavesel;

TEST_CASE("fmt_double: shortest exact round-trip") {
  CHECK(fmt_double(0.1) == "0.1");
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(-2.5) == "-2.5");
  CHECK(fmt_double(0.0) == "0");
  CHECK(fmt_double(100.0) == "100");

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < 500; ++i) {
    const double v = (i % 2 == 0) ? u(rng) : std::ldexp(e(rng), (i % 41) - 20);
    CAPTURE(v);
    CHECK(std::stod(fmt_double(v)) == v);  // bitwise round-trip
  }

  CHECK(fmt_double(0.123456789, 3) == "0.123");
  CHECK(fmt_double(1234.5678, 6) == "1234.57");
}

TEST_CASE("pattern CSV round-trip") {
  PointPattern p;
  p.window = Window{0.0, 2.0, -1.0, 1.0};
  p.points = {{0.25, -0.5}, {1.0 / 3.0, 0.1}, {1.9999999, 0.9999999}};

  std::ostringstream os;
  write_pattern_csv(os, p);
  const std::string text = os.str();
  CHECK(text.rfind("x,y\n", 0) == 0);

  std::istringstream is(text);
  const PointPattern back = read_pattern_csv(is, p.window);
  REQUIRE(back.points.size() == p.points.size());
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    CHECK(back.points[i].x == p.points[i].x);  // fmt_double is exact
    CHECK(back.points[i].y == p.points[i].y);
  }
  CHECK(back.window.approx_equal(p.window));

  // Empty pattern: header only, reads back empty.
  PointPattern empty;
  empty.window = Window::unit();
  std::ostringstream eo;
  write_pattern_csv(eo, empty);
  CHECK(eo.str() == "x,y\n");
  std::istringstream ei(eo.str());
  CHECK(read_pattern_csv(ei, Window::unit()).points.empty());

  // Malformed rows fail.
  std::istringstream shortrow("x,y\n0.5\n");
  CHECK_THROWS(read_pattern_csv(shortrow, Window::unit()));
  std::istringstream notnum("x,y\n0.5,zebra\n");
  CHECK_THROWS(read_pattern_csv(notnum, Window::unit()));
}

TEST_CASE("grid CSV round-trip is bitwise") {
  GridImage g(3, 2, Window{-2.0, 4.0, 1.0, 3.5});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int iy = 0; iy < 2; ++iy)
    for (int ix = 0; ix < 3; ++ix) g.at(ix, iy) = u(rng);
  g.at(1, 0) = 1.0 / 3.0;  // non-terminating binary fraction

  std::ostringstream os;
  write_grid_csv(os, g);
  const std::string text = os.str();
  std::istringstream header(text);
  std::string line;
  std::getline(header, line);
  CHECK(line == "3,2");
  std::getline(header, line);
  CHECK(line == "-2,4,1,3.5");

  std::istringstream is(text);
  const GridImage back = read_grid_csv(is);
  REQUIRE(back.nx == 3);
  REQUIRE(back.ny == 2);
  CHECK(back.window.approx_equal(g.window));
  for (int iy = 0; iy < 2; ++iy)
    for (int ix = 0; ix < 3; ++ix) CHECK(back.at(ix, iy) == g.at(ix, iy));

  // Wrong cell count fails.
  std::istringstream badrow("2,1\n0,1,0,1\n0.5\n");
  CHECK_THROWS(read_grid_csv(badrow));
  std::istringstream badheader("x,y\n");
  CHECK_THROWS(read_grid_csv(badheader));
}

TEST_CASE("split_csv_line") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
  CHECK(split_csv_line("lone") == std::vector<std::string>{"lone"});
  CHECK(split_csv_line("trailing,") == std::vector<std::string>{"trailing", ""});
  CHECK(split_csv_line("a,b\r") == std::vector<std::string>{"a", "b"});  // CRLF input
}
