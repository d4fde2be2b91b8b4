#include "wavesel/geometry.hpp"

namespace wavesel {

double GridImage::bilinear(Point p) const {
  // Coordinates on the cell-center lattice; clamp implements the nearest
  // extension outside [first center, last center].
  double u = (p.x - window.x0) / dx() - 0.5;
  double v = (p.y - window.y0) / dy() - 0.5;
  u = std::clamp(u, 0.0, static_cast<double>(nx - 1));
  v = std::clamp(v, 0.0, static_cast<double>(ny - 1));
  int i0 = std::min(static_cast<int>(std::floor(u)), nx > 1 ? nx - 2 : 0);
  int j0 = std::min(static_cast<int>(std::floor(v)), ny > 1 ? ny - 2 : 0);
  int i1 = std::min(i0 + 1, nx - 1);
  int j1 = std::min(j0 + 1, ny - 1);
  double fu = u - i0, fv = v - j0;
  double a = values(j0, i0) * (1 - fu) + values(j0, i1) * fu;
  double b = values(j1, i0) * (1 - fu) + values(j1, i1) * fu;
  return a * (1 - fv) + b * fv;
}

}  // namespace wavesel
