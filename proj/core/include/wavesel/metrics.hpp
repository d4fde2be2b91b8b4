#pragma once

#include <functional>
#include <optional>
#include <set>

#include "wavesel/select.hpp"

namespace wavesel {

/// True coefficient surface beta_p(t): p is 1-based, t in unit-square
/// coordinates.  Must return 0 exactly where the predictor is inactive.
using TruthBeta = std::function<double(int p, Point t)>;

/// |selected n truth| / |truth|.  Throws std::invalid_argument on empty truth.
double tpr_global(const std::set<int>& selected, const std::set<int>& truth);

struct TprLocalResult {
  double value = 0.0;  ///< mean over used points; NaN when used == 0
  int used = 0;
  int skipped = 0;     ///< points whose true local active set is empty
};

/// Local true-positive rate: mean over the given points of
/// |J(t) n Jhat(t)| / |J(t)| where J(t) = {p : beta_p(t) != 0} and Jhat(t)
/// is the fitted local active set.  Points with empty J(t) are skipped.
TprLocalResult tpr_local(const Eigen::VectorXd& coefficients, const HaarBasis& basis, int P,
                         const std::vector<Point>& unit_points, const TruthBeta& truth);

/// Root mean squared prediction error of the coefficient surfaces over a
/// G x G grid of cell centers:
///   sqrt( (1 / (G^2 P)) * sum_g sum_p (betahat_p(t_g) - beta_p(t_g))^2 ).
double rmspe_beta(const Eigen::VectorXd& coefficients, const HaarBasis& basis, int P,
                  const TruthBeta& truth, int grid = 64);

struct EvaluationReport {
  double rmspe = 0.0;                 ///< from the unpenalized refit
  double tpr_global = 0.0;            ///< from the path solution support
  std::optional<double> tpr_local;    ///< local methods only; absent otherwise
  int tpr_local_skipped = 0;
  int tpr_local_used = 0;
  double runtime_seconds = 0.0;
};

/// Scores a selection result against the truth.  Support metrics (TPRs) use
/// the penalized path solution at lambda*; the error metric (RMSPE) uses the
/// unpenalized refit on the selected support.  The global truth set is the
/// set of predictors whose surface is nonzero anywhere on the RMSPE grid.
EvaluationReport evaluate(const SelectionResult& result, const PointPattern& pattern,
                          const TruthBeta& truth, int rmspe_grid = 64);

}  // namespace wavesel
