#include "wavesel/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wavesel {

double tpr_global(const std::set<int>& selected, const std::set<int>& truth) {
  if (truth.empty()) throw std::invalid_argument("tpr_global: empty truth set");
  int hits = 0;
  for (int p : truth) hits += selected.count(p) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

TprLocalResult tpr_local(const Eigen::VectorXd& coefficients, const HaarBasis& basis, int P,
                         const std::vector<Point>& unit_points, const TruthBeta& truth) {
  TprLocalResult out;
  double sum = 0.0;
  for (const Point& t : unit_points) {
    std::vector<int> truth_active;
    for (int p = 1; p <= P; ++p)
      if (truth(p, t) != 0.0) truth_active.push_back(p);
    if (truth_active.empty()) {
      ++out.skipped;
      continue;
    }
    std::set<int> fitted = local_active_set(coefficients, basis, P, t);
    int hits = 0;
    for (int p : truth_active) hits += fitted.count(p) ? 1 : 0;
    sum += static_cast<double>(hits) / static_cast<double>(truth_active.size());
    ++out.used;
  }
  out.value = out.used > 0 ? sum / out.used : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double rmspe_beta(const Eigen::VectorXd& coefficients, const HaarBasis& basis, int P,
                  const TruthBeta& truth, int grid) {
  if (grid < 1) throw std::invalid_argument("rmspe_beta: grid must be positive");
  double ss = 0.0;
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      const Point t{(ix + 0.5) / grid, (iy + 0.5) / grid};
      for (int p = 1; p <= P; ++p) {
        const double d = beta_hat_surface(coefficients, basis, p, t) - truth(p, t);
        ss += d * d;
      }
    }
  }
  return std::sqrt(ss / (static_cast<double>(grid) * grid * P));
}

EvaluationReport evaluate(const SelectionResult& result, const PointPattern& pattern,
                          const TruthBeta& truth, int rmspe_grid) {
  EvaluationReport out;
  out.runtime_seconds = result.runtime_seconds;

  // One pass over the grid gives both the RMSPE sum and the global truth set.
  std::set<int> truth_global;
  double ss = 0.0;
  for (int iy = 0; iy < rmspe_grid; ++iy) {
    for (int ix = 0; ix < rmspe_grid; ++ix) {
      const Point t{(ix + 0.5) / rmspe_grid, (iy + 0.5) / rmspe_grid};
      for (int p = 1; p <= result.P; ++p) {
        const double b = truth(p, t);
        if (b != 0.0) truth_global.insert(p);
        const double d = beta_hat_surface(result.refit.coefficients, *result.basis, p, t) - b;
        ss += d * d;
      }
    }
  }
  out.rmspe = std::sqrt(ss / (static_cast<double>(rmspe_grid) * rmspe_grid * result.P));
  out.tpr_global = tpr_global(result.global_active, truth_global);

  if (method_is_local(result.method)) {
    std::vector<Point> unit_points;
    unit_points.reserve(pattern.points.size());
    for (const Point& s : pattern.points)
      unit_points.push_back(affine_to_unit(pattern.window, s));
    TprLocalResult lr =
        tpr_local(result.path_fit.coefficients, *result.basis, result.P, unit_points, truth);
    out.tpr_local_skipped = lr.skipped;
    out.tpr_local_used = lr.used;
    if (lr.used > 0) out.tpr_local = lr.value;
  }
  return out;
}

}  // namespace wavesel
