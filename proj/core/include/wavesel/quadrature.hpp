#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "wavesel/geometry.hpp"

namespace wavesel {

/// Berman-Turner quadrature scheme: the observed points plus a regular grid
/// of dummy points, with counting-measure weights.  Node order is the data
/// points in input order followed by dummies row-major (iy outer, ix inner).
struct QuadratureScheme {
  std::vector<Point> nodes;
  Eigen::VectorXd weights;      ///< w_m > 0, sums to the window area
  std::vector<std::uint8_t> labels;  ///< 1 = data node, 0 = dummy node
  int n_data = 0;
  Window window = Window::unit();

  int M() const { return static_cast<int>(nodes.size()); }
  /// Log-weight offsets o_m = log w_m for the equivalent offset Poisson GLM.
  Eigen::VectorXd offsets() const { return weights.array().log().matrix(); }
};

/// Build the scheme with a qx-by-qy dummy grid (dummies at tile centers).
/// Each tile's area is split evenly among the nodes it contains, so the
/// weights sum exactly to the window area.  Duplicated data points are kept
/// as separate nodes.  Throws std::invalid_argument for non-positive grid
/// sizes, a degenerate window, or points outside the window.
QuadratureScheme build_quadrature(const PointPattern& pattern, const Window& window, int qx,
                                  int qy);

/// log-likelihood of the weighted approximation
///   sum_m  y_m * eta_m - w_m * exp(eta_m),   eta = design * coeffs,
/// where y_m is the 0/1 node label.  The design matrix carries every model
/// column including the intercept column.  Throws std::invalid_argument on
/// dimension mismatch and std::overflow_error if any eta_m > 700.
double bt_loglik(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                 const QuadratureScheme& scheme);

/// Gradient  sum_m (y_m - w_m exp(eta_m)) z_m.
Eigen::VectorXd bt_score(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                         const QuadratureScheme& scheme);

/// Hessian  -sum_m w_m exp(eta_m) z_m z_m^T (negative semidefinite).
Eigen::MatrixXd bt_hessian(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& design,
                           const QuadratureScheme& scheme);

}  // namespace wavesel
