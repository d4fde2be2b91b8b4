#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace wavesel {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangular observation window [x0,x1] x [y0,y1].
struct Window {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  static Window unit() { return Window{0.0, 1.0, 0.0, 1.0}; }

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  bool contains(Point p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  bool approx_equal(const Window& o, double tol = 1e-12) const {
    double s = std::max({1.0, std::abs(x0), std::abs(x1), std::abs(y0), std::abs(y1)});
    return std::abs(x0 - o.x0) <= tol * s && std::abs(x1 - o.x1) <= tol * s &&
           std::abs(y0 - o.y0) <= tol * s && std::abs(y1 - o.y1) <= tol * s;
  }
  void validate() const {
    if (!(x1 > x0) || !(y1 > y0))
      throw std::invalid_argument("Window: empty or inverted range");
  }
};

/// Index of the grid cell containing coordinate v, for n half-open cells over
/// [lo, hi); the upper boundary v == hi is assigned to the last cell.
inline int cell_index(double v, double lo, double hi, int n) {
  double u = (v - lo) / (hi - lo) * n;
  int i = static_cast<int>(std::floor(u));
  return std::clamp(i, 0, n - 1);
}

struct PointPattern {
  std::vector<Point> points;
  Window window = Window::unit();

  int n() const { return static_cast<int>(points.size()); }
};

/// Pixel image over a window: nx*ny cells, value stored at each cell center.
/// values(iy, ix) covers [x0+ix*dx, x0+(ix+1)*dx) x [y0+iy*dy, y0+(iy+1)*dy).
struct GridImage {
  int nx = 0, ny = 0;
  Window window = Window::unit();
  Eigen::MatrixXd values;  // ny rows, nx cols

  GridImage() = default;
  GridImage(int nx_, int ny_, const Window& w, double fill = 0.0)
      : nx(nx_), ny(ny_), window(w), values(Eigen::MatrixXd::Constant(ny_, nx_, fill)) {
    if (nx_ <= 0 || ny_ <= 0) throw std::invalid_argument("GridImage: non-positive resolution");
    w.validate();
  }

  double dx() const { return window.width() / nx; }
  double dy() const { return window.height() / ny; }
  double cell_area() const { return dx() * dy(); }
  Point cell_center(int ix, int iy) const {
    return {window.x0 + (ix + 0.5) * dx(), window.y0 + (iy + 0.5) * dy()};
  }
  double& at(int ix, int iy) { return values(iy, ix); }
  double at(int ix, int iy) const { return values(iy, ix); }

  /// Bilinear interpolation between cell centers with nearest-neighbor
  /// extension beyond the outermost centers.  With that extension the exact
  /// integral of the interpolant over the window equals the Riemann cell sum
  /// (each center's tent basis integrates to one cell area), a property the
  /// simulator's intensity calibration relies on.
  double bilinear(Point p) const;

  /// Riemann cell-sum integral of the image over its window.
  double integral() const { return values.sum() * cell_area(); }
};

}  // namespace wavesel
