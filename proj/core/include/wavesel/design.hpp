#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavesel/geometry.hpp"
#include "wavesel/quadrature.hpp"
#include "wavesel/wavelet.hpp"

namespace wavesel {

/// Covariate values evaluated at quadrature nodes: M rows, P columns.
struct CovariateTable {
  Eigen::MatrixXd values;
  std::vector<std::string> names;

  int M() const { return static_cast<int>(values.rows()); }
  int P() const { return static_cast<int>(values.cols()); }
};

/// Affine map of window coordinates onto the unit square (and back).
Point affine_to_unit(const Window& w, Point p);
Point affine_from_unit(const Window& w, Point t);
std::vector<Point> affine_to_unit(const Window& w, std::span<const Point> pts);

struct RasterizeOptions {
  /// Gaussian smoothing bandwidth in units of cell widths (per axis).
  double bandwidth_cells = 2.0;
  /// Bandwidth->0 mode: average the samples falling in each cell, exact
  /// passthrough when samples sit at every cell center.
  bool exact_passthrough = false;
};

/// Smooth scattered covariate samples onto a pixel image by normalized
/// Gaussian kernel weights.  Cells receiving zero total weight take the
/// global sample mean.  Throws std::invalid_argument when samples is empty.
GridImage rasterize_covariate(std::span<const std::pair<Point, double>> samples,
                              const Window& window, int nx, int ny,
                              const RasterizeOptions& opt = {});

/// Bilinear interpolation of each covariate image at every quadrature node.
/// All images must share the scheme's window (tolerance 1e-12 relative).
CovariateTable covariates_at_nodes(const std::vector<GridImage>& images,
                                   const std::vector<std::string>& names,
                                   const QuadratureScheme& scheme);

/// Per-column affine standardization record: standardized = (raw - center)
/// / scale.  Under normalized quadrature weights the standardized column has
/// weighted mean 0 and weighted second moment 1.  Constant columns (weighted
/// variance ~ 0) keep scale 1 and are flagged; they are excluded from
/// penalized fitting.
struct StandardizationRecord {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  std::vector<std::uint8_t> constant;
};

/// Localized design matrix: column p*R + r (0-based) holds atom_r(t(s)) *
/// X_{p+1}(s) at the quadrature nodes, where t() is the affine map onto the
/// unit square.  The intercept is NOT a column; solvers carry it separately.
struct LocalizedDesign {
  Eigen::MatrixXd Z;                            ///< M x K, raw scale
  std::shared_ptr<const HaarBasis> basis;
  std::vector<std::string> names;               ///< P predictor names
  int P = 0;
  int R = 0;
  StandardizationRecord standardization;
  /// Per-atom node index lists (atom support tiles); column p*R + r is
  /// nonzero only at nodes in atom_support[r].
  std::vector<std::vector<int>> atom_support;

  int K() const { return static_cast<int>(Z.cols()); }
  int M() const { return static_cast<int>(Z.rows()); }
  int col_index(int p, int r) const { return p * R + r; }
  const std::vector<int>& support(int col) const {
    return atom_support[static_cast<size_t>(col % R)];
  }
  /// Standardized value of one column entry.
  double standardized(int m, int k) const {
    return (Z(m, k) - standardization.center[k]) / standardization.scale[k];
  }
  /// Materialize the standardized matrix (tests / oracles).
  Eigen::MatrixXd standardized_matrix() const;
};

/// Assemble the localized design for a quadrature scheme.  Throws
/// std::invalid_argument if the table row count differs from scheme.M().
LocalizedDesign build_design(const CovariateTable& table,
                             std::shared_ptr<const HaarBasis> basis,
                             const QuadratureScheme& scheme);

}  // namespace wavesel
