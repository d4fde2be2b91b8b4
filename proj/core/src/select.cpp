#include "wavesel/select.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wavesel {

const char* method_name(Method m) {
  switch (m) {
    case Method::LLI: return "LLI";
    case Method::LLS: return "LLS";
    case Method::Lasso: return "LASSO";
    case Method::Scad: return "SCAD";
    case Method::AL: return "AL";
  }
  throw std::logic_error("method_name: bad enum");
}

Method method_from_name(const std::string& name) {
  if (name == "LLI") return Method::LLI;
  if (name == "LLS") return Method::LLS;
  if (name == "LASSO") return Method::Lasso;
  if (name == "SCAD") return Method::Scad;
  if (name == "AL") return Method::AL;
  throw std::invalid_argument("unknown method \"" + name +
                              "\" (valid: LLI, LLS, LASSO, SCAD, AL)");
}

bool method_is_local(Method m) { return m == Method::LLI || m == Method::LLS; }

namespace {

WqbicResult information_criterion(const FitPath& path, double mu_hat, double loglik_scale,
                                  const char* what) {
  if (!(mu_hat > 0.0))
    throw std::invalid_argument(std::string(what) + ": mu_hat must be positive");
  WqbicResult out;
  out.scores.resize(static_cast<Eigen::Index>(path.fits.size()));
  const double logmu = std::log(mu_hat);
  for (size_t i = 0; i < path.fits.size(); ++i) {
    const FitResult& f = path.fits[i];
    if (f.diverged || !std::isfinite(f.bt_loglik)) {
      out.scores[static_cast<Eigen::Index>(i)] = std::numeric_limits<double>::infinity();
      continue;
    }
    out.scores[static_cast<Eigen::Index>(i)] =
        -2.0 * loglik_scale * f.bt_loglik + f.df * logmu;
    // Scanning from the largest lambda with a strict comparison implements
    // the tie-break toward larger lambda.
    if (out.argmin < 0 || out.scores[static_cast<Eigen::Index>(i)] <
                              out.scores[out.argmin]) {
      out.argmin = static_cast<int>(i);
    }
  }
  if (out.argmin < 0)
    throw std::runtime_error(std::string(what) + ": no usable fit in the path");
  return out;
}

}  // namespace

WqbicResult quasi_bic(const FitPath& path, double mu_hat) {
  return information_criterion(path, mu_hat, 1.0, "quasi_bic");
}

WqbicResult wqbic(const FitPath& path, double mu_hat) {
  return information_criterion(path, mu_hat, 1.0 / mu_hat, "wqbic");
}

std::set<int> global_active_set(const Eigen::VectorXd& coefficients, int P, int R) {
  if (coefficients.size() != static_cast<Eigen::Index>(P) * R)
    throw std::invalid_argument("global_active_set: coefficient length != P*R");
  std::set<int> out;
  for (int p = 0; p < P; ++p)
    for (int r = 0; r < R; ++r)
      if (coefficients[p * R + r] != 0.0) {
        out.insert(p + 1);
        break;
      }
  return out;
}

std::set<int> local_active_set(const Eigen::VectorXd& coefficients, const HaarBasis& basis,
                               int P, Point t) {
  const int R = basis.size();
  if (coefficients.size() != static_cast<Eigen::Index>(P) * R)
    throw std::invalid_argument("local_active_set: coefficient length != P*R");
  std::set<int> out;
  for (int p = 0; p < P; ++p)
    for (int r = 0; r < R; ++r)
      if (coefficients[p * R + r] != 0.0 && basis.eval_atom(r, t) != 0.0) {
        out.insert(p + 1);
        break;
      }
  return out;
}

double beta_hat_surface(const Eigen::VectorXd& coefficients, const HaarBasis& basis, int p,
                        Point t) {
  const int R = basis.size();
  const int P = static_cast<int>(coefficients.size()) / R;
  if (coefficients.size() != static_cast<Eigen::Index>(P) * R || p < 1 || p > P)
    throw std::invalid_argument("beta_hat_surface: bad predictor index");
  return basis.reconstruct(coefficients.segment(static_cast<Eigen::Index>(p - 1) * R, R), t);
}

double predict_intensity(const FitResult& fit, const HaarBasis& basis,
                         const Eigen::VectorXd& covariates, double intercept_override,
                         Point t) {
  const int R = basis.size();
  const int P = static_cast<int>(covariates.size());
  if (fit.coefficients.size() != static_cast<Eigen::Index>(P) * R)
    throw std::invalid_argument("predict_intensity: coefficient length != P*R");
  double eta = intercept_override;
  for (int p = 1; p <= P; ++p) {
    if (covariates[p - 1] == 0.0) continue;
    eta += beta_hat_surface(fit.coefficients, basis, p, t) * covariates[p - 1];
  }
  if (eta > 700.0) throw std::overflow_error("predict_intensity: linear predictor exceeds 700");
  return std::exp(eta);
}

double predict_intensity(const FitResult& fit, const HaarBasis& basis,
                         const Eigen::VectorXd& covariates, Point t) {
  return predict_intensity(fit, basis, covariates, fit.intercept, t);
}

SelectionResult run_method(const PointPattern& pattern, const std::vector<GridImage>& covariates,
                           const std::vector<std::string>& names, const MethodConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  if (config.dummy_count < 1) throw std::invalid_argument("run_method: dummy_count < 1");

  SelectionResult out;
  out.method = config.method;
  out.names = names;

  const int q = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.dummy_count))));
  QuadratureScheme scheme = build_quadrature(pattern, pattern.window, q, q);
  CovariateTable table = covariates_at_nodes(covariates, names, scheme);

  // Local methods get the full dictionary; global baselines use the single
  // constant scaling atom, which makes each design column the raw covariate.
  auto basis = method_is_local(config.method)
                   ? std::make_shared<const HaarBasis>(config.j0, config.J)
                   : std::make_shared<const HaarBasis>(0, 0);
  LocalizedDesign design = build_design(table, basis, scheme);
  out.basis = basis;
  out.P = design.P;
  out.R = design.R;
  out.mu_hat = resolve_mu_hat(scheme, config.control.mu_hat_rule);

  if (scheme.n_data == 0) {
    // Zero-event pattern: the intercept-only model is the entire answer.
    out.refit = fit_unpenalized(scheme, design, {}, config.control);
    out.path_fit = out.refit;
    out.lambda_index = -1;
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
  }

  PenaltySpec penalty;
  penalty.scad_shape = config.scad_shape;
  switch (config.method) {
    case Method::LLI:
    case Method::Lasso: penalty.kind = PenaltyKind::L1; break;
    case Method::LLS:
    case Method::Scad: penalty.kind = PenaltyKind::Scad; break;
    case Method::AL: penalty.kind = PenaltyKind::AdaptiveL1; break;
  }

  if (config.method == Method::AL) {
    // Ridge pilot over a short path, chosen by WQBIC; adaptive weights from
    // the pilot's standardized coefficients.
    PenaltySpec ridge;
    ridge.kind = PenaltyKind::Ridge;
    PathSpec rp;
    rp.length = config.ridge_path_length;
    rp.min_ratio = config.ridge_min_ratio;
    FitPath pilot_path = fit_path(scheme, design, ridge, rp, config.control);
    WqbicResult pw = quasi_bic(pilot_path, out.mu_hat);
    const Eigen::VectorXd& pilot = pilot_path.fits[static_cast<size_t>(pw.argmin)].std_coefficients;
    Eigen::VectorXd v(design.K());
    for (int k = 0; k < design.K(); ++k)
      v[k] = 1.0 / (std::pow(std::abs(pilot[k]), config.adaptive_exponent) + 1e-8);
    penalty.weights = std::move(v);
  }

  out.path = fit_path(scheme, design, penalty, config.path, config.control);
  WqbicResult wq = quasi_bic(out.path, out.mu_hat);
  out.selection_scores = wq.scores;
  out.lambda_index = wq.argmin;
  out.lambda_star = out.path.fits[static_cast<size_t>(wq.argmin)].lambda;
  out.path_fit = out.path.fits[static_cast<size_t>(wq.argmin)];

  for (int k = 0; k < design.K(); ++k)
    if (out.path_fit.coefficients[k] != 0.0) out.active_columns.push_back(k);
  out.global_active = global_active_set(out.path_fit.coefficients, design.P, design.R);

  out.refit = fit_unpenalized(scheme, design, out.active_columns, config.control);

  out.diagnostics.path_points = static_cast<int>(out.path.fits.size());
  out.diagnostics.truncated = out.path.truncated_at >= 0;
  out.diagnostics.error = out.path.error;
  for (const FitResult& f : out.path.fits) {
    if (!f.converged) ++out.diagnostics.nonconverged;
    else out.diagnostics.max_kkt_violation =
        std::max(out.diagnostics.max_kkt_violation, f.kkt_violation);
    out.diagnostics.ascent_violations += f.ascent_violations;
  }
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace wavesel
