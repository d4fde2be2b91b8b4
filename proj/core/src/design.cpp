#include "wavesel/design.hpp"

#include <cmath>
#include <stdexcept>

namespace wavesel {

Point affine_to_unit(const Window& w, Point p) {
  w.validate();
  return {(p.x - w.x0) / w.width(), (p.y - w.y0) / w.height()};
}

Point affine_from_unit(const Window& w, Point t) {
  w.validate();
  return {w.x0 + t.x * w.width(), w.y0 + t.y * w.height()};
}

std::vector<Point> affine_to_unit(const Window& w, std::span<const Point> pts) {
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const Point& p : pts) out.push_back(affine_to_unit(w, p));
  return out;
}

GridImage rasterize_covariate(std::span<const std::pair<Point, double>> samples,
                              const Window& window, int nx, int ny,
                              const RasterizeOptions& opt) {
  if (samples.empty()) throw std::invalid_argument("rasterize_covariate: no samples");
  GridImage g(nx, ny, window);
  double mean = 0.0;
  for (const auto& s : samples) mean += s.second;
  mean /= static_cast<double>(samples.size());

  if (opt.exact_passthrough) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(ny, nx);
    Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(ny, nx);
    for (const auto& [p, v] : samples) {
      int ix = cell_index(p.x, window.x0, window.x1, nx);
      int iy = cell_index(p.y, window.y0, window.y1, ny);
      sum(iy, ix) += v;
      cnt(iy, ix) += 1.0;
    }
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        g.values(iy, ix) = cnt(iy, ix) > 0 ? sum(iy, ix) / cnt(iy, ix) : mean;
    return g;
  }

  const double bwx = opt.bandwidth_cells * g.dx(), bwy = opt.bandwidth_cells * g.dy();
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Point c = g.cell_center(ix, iy);
      double wsum = 0.0, vsum = 0.0;
      for (const auto& [p, v] : samples) {
        const double ax = (p.x - c.x) / bwx, ay = (p.y - c.y) / bwy;
        const double w = std::exp(-0.5 * (ax * ax + ay * ay));
        wsum += w;
        vsum += w * v;
      }
      g.values(iy, ix) = wsum > 0.0 ? vsum / wsum : mean;
    }
  return g;
}

CovariateTable covariates_at_nodes(const std::vector<GridImage>& images,
                                   const std::vector<std::string>& names,
                                   const QuadratureScheme& scheme) {
  if (images.size() != names.size())
    throw std::invalid_argument("covariates_at_nodes: names/images size mismatch");
  CovariateTable t;
  t.names = names;
  t.values.resize(scheme.M(), static_cast<Eigen::Index>(images.size()));
  for (size_t p = 0; p < images.size(); ++p) {
    if (!images[p].window.approx_equal(scheme.window))
      throw std::invalid_argument("covariates_at_nodes: image window differs from scheme window");
    for (int m = 0; m < scheme.M(); ++m)
      t.values(m, static_cast<Eigen::Index>(p)) =
          images[p].bilinear(scheme.nodes[static_cast<size_t>(m)]);
  }
  return t;
}

Eigen::MatrixXd LocalizedDesign::standardized_matrix() const {
  Eigen::MatrixXd S = Z;
  for (int k = 0; k < K(); ++k)
    S.col(k) = (Z.col(k).array() - standardization.center[k]) / standardization.scale[k];
  return S;
}

LocalizedDesign build_design(const CovariateTable& table,
                             std::shared_ptr<const HaarBasis> basis,
                             const QuadratureScheme& scheme) {
  if (!basis) throw std::invalid_argument("build_design: null basis");
  if (table.M() != scheme.M())
    throw std::invalid_argument("build_design: covariate rows != quadrature nodes");

  LocalizedDesign d;
  d.basis = basis;
  d.names = table.names;
  d.P = table.P();
  d.R = basis->size();
  const int M = scheme.M(), K = d.P * d.R;

  // Atom supports and atom values at each node's unit-square image.
  std::vector<Point> t = affine_to_unit(scheme.window, scheme.nodes);
  Eigen::MatrixXd atom_vals(M, d.R);
  d.atom_support.assign(static_cast<size_t>(d.R), {});
  for (int m = 0; m < M; ++m) {
    Eigen::VectorXd row = basis->eval_basis(t[static_cast<size_t>(m)]);
    atom_vals.row(m) = row.transpose();
    for (int r = 0; r < d.R; ++r)
      if (row[r] != 0.0) d.atom_support[static_cast<size_t>(r)].push_back(m);
  }

  d.Z = Eigen::MatrixXd::Zero(M, K);
  for (int p = 0; p < d.P; ++p)
    for (int r = 0; r < d.R; ++r) {
      const int k = d.col_index(p, r);
      for (int m : d.atom_support[static_cast<size_t>(r)])
        d.Z(m, k) = atom_vals(m, r) * table.values(m, p);
    }

  // Weighted standardization under normalized quadrature weights.
  const double wtot = scheme.weights.sum();
  Eigen::VectorXd wn = scheme.weights / wtot;
  d.standardization.center.resize(K);
  d.standardization.scale.resize(K);
  d.standardization.constant.assign(static_cast<size_t>(K), 0);
  for (int k = 0; k < K; ++k) {
    const double c = wn.dot(d.Z.col(k));
    const double var = (d.Z.col(k).array() - c).square().matrix().dot(wn);
    d.standardization.center[k] = c;
    if (var <= 1e-12 * std::max(1.0, c * c)) {
      d.standardization.scale[k] = 1.0;
      d.standardization.constant[static_cast<size_t>(k)] = 1;
    } else {
      d.standardization.scale[k] = std::sqrt(var);
    }
  }
  return d;
}

}  // namespace wavesel
