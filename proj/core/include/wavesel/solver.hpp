#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wavesel/design.hpp"
#include "wavesel/quadrature.hpp"

namespace wavesel {

enum class PenaltyKind { L1, Scad, AdaptiveL1, Ridge, None };

/// Penalty term subtracted from the scaled likelihood objective
///   Q(w) = loglik(w) / mu_hat - Pen(w):
///   L1 / AdaptiveL1: lambda * sum_k v_k |w_k|       (v_k = 1 for plain L1)
///   Scad:            sum_k P_lambda(|w_k|; shape)
///   Ridge:           (lambda / 2) * sum_k v_k w_k^2
/// Weights apply on the standardized coefficient scale.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::L1;
  double scad_shape = 3.7;
  std::optional<Eigen::VectorXd> weights;  ///< per-column v_k > 0
};

/// Lambda grid: log-spaced from lambda_max down to lambda_max * min_ratio,
/// unless explicit values are given.
struct PathSpec {
  int length = 100;
  double min_ratio = 1e-4;
  std::vector<double> explicit_lambdas;
};

enum class MuHatRule { ObservedCount, WindowArea };

struct SolverControl {
  int max_outer = 100;          ///< IRLS outer iterations per lambda
  int max_cd_passes = 50;       ///< coordinate-descent passes per subproblem;
                                ///< inexact subproblem solves are fine for the
                                ///< outer loop, which re-certifies exactly
  int full_sweep_every = 10;    ///< active-set cycles between full sweeps
  double tol_inner = 1e-2;      ///< CD stationarity target as a fraction of the
                                ///< current outer KKT residual (forcing
                                ///< sequence); tightened further when the
                                ///< residual stalls
  double kkt_tol = 1e-7;        ///< exact-objective KKT residual target
  int stall_patience = 25;      ///< outer rounds without the KKT residual
                                ///< halving before the fit stops as
                                ///< nonconverged
  double newton_tol = 1e-8;     ///< refit: sup-norm of the score
  int max_newton = 100;
  double separation_cap = 30.0; ///< |standardized coefficient| cap in refits
  MuHatRule mu_hat_rule = MuHatRule::ObservedCount;
};

/// One fitted model.  Coefficients are reported on the original column scale
/// (length K, zeros off-support); the standardized-scale solution is kept for
/// pilot-weight construction and diagnostics.
struct FitResult {
  double lambda = 0.0;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_coefficients;
  bool converged = false;
  bool diverged = false;
  bool separated = false;
  int iterations = 0;
  int cd_passes = 0;  ///< coordinate-descent sweeps summed over subproblems
  double bt_loglik = std::numeric_limits<double>::quiet_NaN();
  int df = 0;  ///< nonzero coefficients, intercept excluded
  double kkt_violation = std::numeric_limits<double>::quiet_NaN();
  int ascent_violations = 0;
  std::vector<int> dropped_columns;  ///< refit: rank-deficient columns removed
};

struct FitPath {
  std::vector<double> lambdas;   ///< requested grid (descending)
  std::vector<FitResult> fits;   ///< may be shorter when truncated
  double lambda_max = 0.0;
  double mu_hat = 0.0;
  int truncated_at = -1;         ///< grid index of the first diverged fit
  std::string error;             ///< set when truncated
};

double soft_threshold(double z, double gamma);

/// SCAD penalty value / derivative as functions of |theta|.
double scad_penalty(double theta, double lambda, double shape);
double scad_derivative(double theta, double lambda, double shape);

/// Exact minimizer of (d/2) t^2 - z t + P_scad(|t|; lambda, shape) over t.
/// Reduces to the familiar three-branch closed form when d == 1.
double scad_coordinate_update(double z, double d, double lambda, double shape);

/// mu_hat plug-in used to scale the likelihood (observed count by default).
double resolve_mu_hat(const QuadratureScheme& scheme, MuHatRule rule);

/// Smallest lambda at which every penalized coefficient is zero, i.e.
/// max_k |score_k(null)| / (mu_hat * v_k) over included columns.
double compute_lambda_max(const QuadratureScheme& scheme, const LocalizedDesign& design,
                          const PenaltySpec& penalty, const SolverControl& control = {});

/// Penalized path fit: IRLS outer loop + coordinate descent with warm starts
/// along a descending lambda grid.  A diverged lambda truncates the path and
/// records the error; earlier fits are kept.
FitPath fit_path(const QuadratureScheme& scheme, const LocalizedDesign& design,
                 const PenaltySpec& penalty, const PathSpec& path = {},
                 const SolverControl& control = {});

/// Single-lambda fit from a cold start (all coefficients zero).
FitResult fit_single(const QuadratureScheme& scheme, const LocalizedDesign& design,
                     const PenaltySpec& penalty, double lambda,
                     const SolverControl& control = {});

/// Unpenalized Newton refit restricted to the given design columns.
/// Rank-deficient columns are dropped by pivoted QR (reported in the result);
/// separation is handled by capping standardized coefficients at +-cap with
/// the `separated` flag raised.  An empty support yields the intercept-only
/// model (a valid result).
FitResult fit_unpenalized(const QuadratureScheme& scheme, const LocalizedDesign& design,
                          const std::vector<int>& support_columns,
                          const SolverControl& control = {});

/// Path CSV: "index,lambda,df,bt_loglik,converged" (1-based index).
void write_path_csv(std::ostream& os, const FitPath& path);
/// Long-format nonzero coefficients: "index,predictor,r,estimate"
/// (1-based lambda index, predictor, and atom index).
void write_path_coefficients_csv(std::ostream& os, const FitPath& path,
                                 const LocalizedDesign& design);

}  // namespace wavesel
