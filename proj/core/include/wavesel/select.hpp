#pragma once

#include <Eigen/Dense>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "wavesel/design.hpp"
#include "wavesel/solver.hpp"

namespace wavesel {

/// Estimation methods: LLI / LLS fit local (wavelet-localized) coefficients
/// with L1 / SCAD penalties; LASSO / SCAD / AL are the global baselines on
/// the raw covariate design (a single constant atom per predictor).
enum class Method { LLI, LLS, Lasso, Scad, AL };

const char* method_name(Method m);
Method method_from_name(const std::string& name);
bool method_is_local(Method m);

struct MethodConfig {
  Method method = Method::LLI;
  int j0 = 0;
  int J = 2;
  int dummy_count = 256;        ///< dummy grid is ceil(sqrt(count))^2
  double scad_shape = 3.7;
  double adaptive_exponent = 1.0;   ///< AL weights v_k = 1/(|pilot_k|^gamma + 1e-8)
  int ridge_path_length = 20;       ///< AL pilot path
  double ridge_min_ratio = 1e-2;
  PathSpec path;
  SolverControl control;
};

struct WqbicResult {
  Eigen::VectorXd scores;  ///< one per fitted path point
  int argmin = -1;         ///< ties resolved toward the largest lambda
};

/// Quasi-BIC used to choose lambda*:
///   QBIC(lambda) = -2 * loglik + df * log(mu_hat),
/// df excluding the intercept.  Diverged fits are skipped; throws
/// std::runtime_error if no fit is usable.
WqbicResult quasi_bic(const FitPath& path, double mu_hat);

/// mu_hat-scaled variant of the criterion:
///   WQBIC(lambda) = -(2/mu_hat) * loglik + df * log(mu_hat).
/// Reported for comparison; note that scaling only the likelihood term makes
/// the per-coefficient cost mu_hat*log(mu_hat)/2 nats, which swamps any
/// realizable likelihood gain at practical intensities, so run_method selects
/// by quasi_bic (same tie-break and skipping rules).
WqbicResult wqbic(const FitPath& path, double mu_hat);

/// Predictors (1-based) with at least one nonzero coefficient.
std::set<int> global_active_set(const Eigen::VectorXd& coefficients, int P, int R);

/// Predictors (1-based) with a nonzero coefficient on an atom whose tile
/// contains t (unit-square coordinates).
std::set<int> local_active_set(const Eigen::VectorXd& coefficients, const HaarBasis& basis,
                               int P, Point t);

/// Estimated coefficient surface of predictor p (1-based) at unit point t.
double beta_hat_surface(const Eigen::VectorXd& coefficients, const HaarBasis& basis, int p,
                        Point t);

/// Fitted intensity exp{eta(s)} at unit point t given this point's covariate
/// values (length P).  Throws std::overflow_error if eta > 700.
double predict_intensity(const FitResult& fit, const HaarBasis& basis,
                         const Eigen::VectorXd& covariates, double intercept_override,
                         Point t);
double predict_intensity(const FitResult& fit, const HaarBasis& basis,
                         const Eigen::VectorXd& covariates, Point t);

struct SelectionDiagnostics {
  int path_points = 0;
  int nonconverged = 0;          ///< fitted path points that failed to converge
  double max_kkt_violation = 0;  ///< over converged path points
  int ascent_violations = 0;
  bool truncated = false;
  std::string error;
};

struct SelectionResult {
  Method method = Method::LLI;
  std::shared_ptr<const HaarBasis> basis;
  std::vector<std::string> names;
  int P = 0;
  int R = 0;
  double mu_hat = 0.0;
  double lambda_star = 0.0;
  int lambda_index = -1;             ///< 0-based index into path.fits
  Eigen::VectorXd selection_scores;  ///< quasi_bic scores; lambda_index is their argmin
  std::set<int> global_active;       ///< 1-based predictors at lambda_star
  std::vector<int> active_columns;   ///< 0-based design columns at lambda_star
  FitResult path_fit;                ///< path solution at lambda_star
  FitResult refit;                   ///< unpenalized refit on the support
  FitPath path;
  double runtime_seconds = 0.0;
  SelectionDiagnostics diagnostics;
};

/// Full pipeline: quadrature construction, covariate interpolation,
/// localized design, penalized path, WQBIC selection, and the refit.
/// Runtime is wall-clock around this call (simulation excluded by design).
SelectionResult run_method(const PointPattern& pattern, const std::vector<GridImage>& covariates,
                           const std::vector<std::string>& names, const MethodConfig& config);

}  // namespace wavesel
