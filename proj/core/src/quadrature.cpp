#include "wavesel/quadrature.hpp"

#include <stdexcept>

namespace wavesel {

QuadratureScheme build_quadrature(const PointPattern& pattern, const Window& window, int qx,
                                  int qy) {
  window.validate();
  if (qx <= 0 || qy <= 0) throw std::invalid_argument("build_quadrature: non-positive grid size");
  for (const Point& p : pattern.points)
    if (!window.contains(p))
      throw std::invalid_argument("build_quadrature: data point outside the window");

  QuadratureScheme s;
  s.window = window;
  s.n_data = pattern.n();
  int M = pattern.n() + qx * qy;
  s.nodes.reserve(static_cast<size_t>(M));
  s.labels.reserve(static_cast<size_t>(M));

  for (const Point& p : pattern.points) {
    s.nodes.push_back(p);
    s.labels.push_back(1);
  }
  double dx = window.width() / qx, dy = window.height() / qy;
  for (int iy = 0; iy < qy; ++iy)
    for (int ix = 0; ix < qx; ++ix) {
      s.nodes.push_back({window.x0 + (ix + 0.5) * dx, window.y0 + (iy + 0.5) * dy});
      s.labels.push_back(0);
    }

  // Counting-measure weights: tile area divided by the number of nodes in the
  // tile (the dummy guarantees each tile holds at least one node).
  std::vector<int> tile_count(static_cast<size_t>(qx) * qy, 0);
  std::vector<int> tile_of(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m) {
    int ix = cell_index(s.nodes[static_cast<size_t>(m)].x, window.x0, window.x1, qx);
    int iy = cell_index(s.nodes[static_cast<size_t>(m)].y, window.y0, window.y1, qy);
    int t = iy * qx + ix;
    tile_of[static_cast<size_t>(m)] = t;
    ++tile_count[static_cast<size_t>(t)];
  }
  double tile_area = dx * dy;
  s.weights.resize(M);
  for (int m = 0; m < M; ++m)
    s.weights[m] = tile_area / tile_count[static_cast<size_t>(tile_of[static_cast<size_t>(m)])];
  return s;
}

namespace {

Eigen::VectorXd linear_predictor(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                                 const QuadratureScheme& scheme) {
  if (design.rows() != scheme.M())
    throw std::invalid_argument("design rows != number of quadrature nodes");
  if (design.cols() != coeffs.size())
    throw std::invalid_argument("design cols != coefficient length");
  Eigen::VectorXd eta = design * coeffs;
  if ((eta.array() > 700.0).any())
    throw std::overflow_error("linear predictor exceeds 700; exp would overflow");
  return eta;
}

}  // namespace

double bt_loglik(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                 const QuadratureScheme& scheme) {
  Eigen::VectorXd eta = linear_predictor(coeffs, design, scheme);
  double acc = 0.0;
  for (int m = 0; m < scheme.M(); ++m) {
    if (scheme.labels[static_cast<size_t>(m)]) acc += eta[m];
    acc -= scheme.weights[m] * std::exp(eta[m]);
  }
  return acc;
}

Eigen::VectorXd bt_score(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                         const QuadratureScheme& scheme) {
  Eigen::VectorXd eta = linear_predictor(coeffs, design, scheme);
  Eigen::VectorXd resid(scheme.M());
  for (int m = 0; m < scheme.M(); ++m)
    resid[m] = (scheme.labels[static_cast<size_t>(m)] ? 1.0 : 0.0) -
               scheme.weights[m] * std::exp(eta[m]);
  return design.transpose() * resid;
}

Eigen::MatrixXd bt_hessian(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                           const QuadratureScheme& scheme) {
  Eigen::VectorXd eta = linear_predictor(coeffs, design, scheme);
  Eigen::VectorXd w(scheme.M());
  for (int m = 0; m < scheme.M(); ++m) w[m] = scheme.weights[m] * std::exp(eta[m]);
  return -(design.transpose() * w.asDiagonal() * design);
}

}  // namespace wavesel
