#include "wavesel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "wavesel/io.hpp"

namespace wavesel {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double scad_penalty(double theta, double lambda, double shape) {
  const double a = std::abs(theta);
  if (a <= lambda) return lambda * a;
  if (a <= shape * lambda)
    return -(a * a - 2.0 * shape * lambda * a + lambda * lambda) / (2.0 * (shape - 1.0));
  return (shape + 1.0) * lambda * lambda / 2.0;
}

double scad_derivative(double theta, double lambda, double shape) {
  const double a = std::abs(theta);
  if (a <= lambda) return lambda;
  if (a <= shape * lambda) return (shape * lambda - a) / (shape - 1.0);
  return 0.0;
}

double scad_coordinate_update(double z, double d, double lambda, double shape) {
  if (!(d > 0.0)) throw std::invalid_argument("scad_coordinate_update: d must be positive");
  if (shape <= 2.0) throw std::invalid_argument("scad_coordinate_update: shape must exceed 2");
  if (lambda < 0.0) throw std::invalid_argument("scad_coordinate_update: negative lambda");
  if (lambda == 0.0) return z / d;

  const double az = std::abs(z), sg = z >= 0.0 ? 1.0 : -1.0;
  // The minimizer lies on the side of z (or at 0); collect the stationary
  // point of each penalty branch clamped to its interval plus the interval
  // endpoints, and take the best.  Exact for every curvature d, including the
  // nonconvex middle branch (d <= 1/(shape-1)) where the stationarity formula
  // would locate a maximum.
  double cands[6];
  int nc = 0;
  cands[nc++] = 0.0;
  cands[nc++] = lambda;
  cands[nc++] = shape * lambda;
  double t1 = soft_threshold(az, lambda) / d;  // branch |t| <= lambda
  cands[nc++] = std::clamp(t1, 0.0, lambda);
  const double denom = d - 1.0 / (shape - 1.0);
  if (denom > 0.0) {  // branch lambda < |t| <= shape*lambda, convex case
    double t2 = soft_threshold(az, shape * lambda / (shape - 1.0)) / denom;
    if (t2 > lambda && t2 < shape * lambda) cands[nc++] = t2;
  }
  double t3 = az / d;  // branch |t| > shape*lambda (flat penalty)
  if (t3 > shape * lambda) cands[nc++] = t3;

  auto objective = [&](double t) {
    return 0.5 * d * t * t - az * t + scad_penalty(t, lambda, shape);
  };
  double best = 0.0, best_f = objective(0.0);
  for (int i = 1; i < nc; ++i) {
    const double f = objective(cands[i]);
    if (f < best_f - 1e-15 * std::abs(best_f) ||
        (std::abs(f - best_f) <= 1e-15 * std::abs(best_f) && cands[i] < best)) {
      best = cands[i];
      best_f = f;
    }
  }
  return sg * best;
}

double resolve_mu_hat(const QuadratureScheme& scheme, MuHatRule rule) {
  return rule == MuHatRule::ObservedCount ? static_cast<double>(scheme.n_data)
                                          : scheme.window.area();
}

// ===========================================================================
// Internal path solver
// ===========================================================================

namespace {

struct PenaltyEval {
  PenaltyKind kind;
  double shape;
  const Eigen::VectorXd* weights;  // nullptr = all ones

  double w(int k) const { return weights ? (*weights)[k] : 1.0; }

  double value(const Eigen::VectorXd& coef, double lambda,
               const std::vector<std::uint8_t>& excluded) const {
    double acc = 0.0;
    for (int k = 0; k < coef.size(); ++k) {
      if (excluded[static_cast<size_t>(k)]) continue;
      switch (kind) {
        case PenaltyKind::L1:
        case PenaltyKind::AdaptiveL1: acc += lambda * w(k) * std::abs(coef[k]); break;
        case PenaltyKind::Scad: acc += scad_penalty(coef[k], lambda, shape); break;
        case PenaltyKind::Ridge: acc += 0.5 * lambda * w(k) * coef[k] * coef[k]; break;
        case PenaltyKind::None: break;
      }
    }
    return acc;
  }

  // Coordinate minimizer of (d/2) t^2 - z t + pen_k(t; lambda).
  double prox(double z, double d, double lambda, int k) const {
    switch (kind) {
      case PenaltyKind::L1:
      case PenaltyKind::AdaptiveL1: return soft_threshold(z, lambda * w(k)) / d;
      case PenaltyKind::Scad: return scad_coordinate_update(z, d, lambda, shape);
      case PenaltyKind::Ridge: return z / (d + lambda * w(k));
      case PenaltyKind::None: return z / d;
    }
    return 0.0;
  }

  // KKT residual of coordinate k given exact scaled gradient g.
  double kkt(double g, double coef, double lambda, int k) const {
    switch (kind) {
      case PenaltyKind::L1:
      case PenaltyKind::AdaptiveL1:
        return coef == 0.0 ? std::max(0.0, std::abs(g) - lambda * w(k))
                           : std::abs(g - lambda * w(k) * (coef > 0 ? 1.0 : -1.0));
      case PenaltyKind::Scad:
        return coef == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                           : std::abs(g - (coef > 0 ? 1.0 : -1.0) *
                                               scad_derivative(coef, lambda, shape));
      case PenaltyKind::Ridge: return std::abs(g - lambda * w(k) * coef);
      case PenaltyKind::None: return std::abs(g);
    }
    return 0.0;
  }

  // Penalty derivative at a nonzero coefficient (Newton polish).
  double grad(double coef, double lambda, int k) const {
    const double sg = coef > 0 ? 1.0 : -1.0;
    switch (kind) {
      case PenaltyKind::L1:
      case PenaltyKind::AdaptiveL1: return lambda * w(k) * sg;
      case PenaltyKind::Scad: return sg * scad_derivative(coef, lambda, shape);
      case PenaltyKind::Ridge: return lambda * w(k) * coef;
      case PenaltyKind::None: return 0.0;
    }
    return 0.0;
  }

  // Penalty curvature at a nonzero coefficient where it is twice
  // differentiable (Newton polish; SCAD's middle branch is concave).
  double curv(double coef, double lambda, int k) const {
    switch (kind) {
      case PenaltyKind::Scad: {
        const double a = std::abs(coef);
        return (a > lambda && a <= shape * lambda) ? -1.0 / (shape - 1.0) : 0.0;
      }
      case PenaltyKind::Ridge: return lambda * w(k);
      default: return 0.0;
    }
  }

  // Whether the penalty is nonsmooth at zero (sign crossings are truncated).
  bool nonsmooth() const {
    return kind == PenaltyKind::L1 || kind == PenaltyKind::AdaptiveL1 ||
           kind == PenaltyKind::Scad;
  }
};

class PathSolver {
 public:
  PathSolver(const QuadratureScheme& scheme, const LocalizedDesign& design,
             const PenaltySpec& penalty, const SolverControl& control)
      : scheme_(scheme),
        design_(design),
        control_(control),
        M_(scheme.M()),
        K_(design.K()),
        pen_{penalty.kind, penalty.scad_shape,
             penalty.weights ? &penalty.weights.value() : nullptr} {
    if (const char* t = std::getenv("WAVESEL_TRACE")) trace_ = t[0] == '1';
    if (design.M() != M_)
      throw std::invalid_argument("fit_path: design rows != quadrature nodes");
    if (penalty.weights && penalty.weights->size() != K_)
      throw std::invalid_argument("fit_path: penalty weight length != K");
    if (penalty.kind == PenaltyKind::Scad && penalty.scad_shape <= 2.0)
      throw std::invalid_argument("fit_path: SCAD shape must exceed 2");
    mu_hat_ = resolve_mu_hat(scheme, control.mu_hat_rule);
    excluded_.assign(static_cast<size_t>(K_), 0);
    for (int k = 0; k < K_; ++k)
      excluded_[static_cast<size_t>(k)] = design.standardization.constant[static_cast<size_t>(k)];
    y_.resize(M_);
    for (int m = 0; m < M_; ++m) y_[m] = scheme.labels[static_cast<size_t>(m)] ? 1.0 : 0.0;

    w_ = Eigen::VectorXd::Zero(K_);
    double n = static_cast<double>(scheme.n_data);
    c0_ = n > 0 ? std::log(n / scheme.window.area())
                : -control.separation_cap;  // zero-event pattern: capped intercept
    theta_ = Eigen::VectorXd::Zero(M_);
  }

  double mu_hat() const { return mu_hat_; }
  double null_intercept() const { return c0_; }

  /// Exact scaled gradient of loglik/mu_hat w.r.t. standardized coefficients.
  Eigen::VectorXd exact_gradient() const {
    Eigen::VectorXd resid(M_);
    for (int m = 0; m < M_; ++m) resid[m] = y_[m] - mu_[m];
    const double rsum = resid.sum();
    Eigen::VectorXd g(K_);
    for (int k = 0; k < K_; ++k) {
      const auto& supp = design_.support(k);
      const double* zc = design_.Z.col(k).data();
      double acc = 0.0;
      for (int m : supp) acc += resid[m] * zc[m];
      const double c = design_.standardization.center[k];
      const double s = design_.standardization.scale[k];
      g[k] = (acc - c * rsum) / (s * mu_hat_);
    }
    return g;
  }

  double lambda_max() {
    refresh_state();
    Eigen::VectorXd g = exact_gradient();
    double lm = 0.0;
    for (int k = 0; k < K_; ++k) {
      if (excluded_[static_cast<size_t>(k)]) continue;
      lm = std::max(lm, std::abs(g[k]) / pen_.w(k));
    }
    return lm;
  }

  /// Solve at one lambda from the current (warm) state.
  FitResult solve(double lambda) {
    if (trace_) std::fprintf(stderr, "  lambda=%.6g\n", lambda);
    FitResult out;
    out.lambda = lambda;
    cd_passes_total_ = 0;
    if (mu_hat_ <= 0.0) {  // zero-event degenerate case: capped null model
      refresh_state();
      out.converged = true;
      out.kkt_violation = 0.0;
      return finalize(out, lambda);
    }

    double prev_obj = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd w_prev = w_, theta_prev = theta_;
    double c0_prev = c0_;
    // Forcing sequence: each subproblem is solved to a fraction of the
    // current exact KKT residual (loose early, tight near the optimum), and
    // the fraction shrinks whenever the residual stalls — the telltale of an
    // under-solved subproblem.
    constexpr double kInnerTolFloor = 1e-14;
    double force = control_.tol_inner;
    double last_viol = std::numeric_limits<double>::infinity();
    double best_viol = std::numeric_limits<double>::infinity();
    int best_viol_outer = 0;
    int obj_stalls = 0;

    int outer = 0;
    for (outer = 0; outer < control_.max_outer; ++outer) {
      if (!refresh_state()) {  // eta exceeded the overflow guard
        out.diverged = true;
        w_ = w_prev;
        theta_ = theta_prev;
        c0_ = c0_prev;
        refresh_state();
        break;
      }
      double obj = loglik_ / mu_hat_ - pen_.value(w_, lambda, excluded_);

      // Ascent safeguard: back off toward the previous accepted iterate until
      // the penalized objective is no worse.
      if (obj + 1e-10 * (1.0 + std::abs(prev_obj)) < prev_obj) {
        const Eigen::VectorXd w_cand = w_, theta_cand = theta_;
        const double c0_cand = c0_;
        double t = 0.5;
        bool ok = false;
        for (int h = 0; h < 25; ++h, t *= 0.5) {
          w_ = w_prev + t * (w_cand - w_prev);
          theta_ = theta_prev + t * (theta_cand - theta_prev);
          c0_ = c0_prev + t * (c0_cand - c0_prev);
          if (!refresh_state()) continue;
          obj = loglik_ / mu_hat_ - pen_.value(w_, lambda, excluded_);
          if (obj + 1e-10 * (1.0 + std::abs(prev_obj)) >= prev_obj) {
            ok = true;
            break;
          }
        }
        if (!ok) {  // stalled: restore the previous iterate and stop honestly
          ++out.ascent_violations;
          w_ = w_prev;
          theta_ = theta_prev;
          c0_ = c0_prev;
          refresh_state();
          break;
        }
      }
      const bool obj_moved = obj > prev_obj + 1e-12 * (1.0 + std::abs(prev_obj));
      prev_obj = obj;
      w_prev = w_;
      theta_prev = theta_;
      c0_prev = c0_;

      // Convergence: exact KKT system of the penalized objective.
      Eigen::VectorXd g = exact_gradient();
      double viol = std::abs((y_ - mu_).sum()) / mu_hat_;  // unpenalized intercept
      int viol_k = -1;
      for (int k = 0; k < K_; ++k) {
        if (excluded_[static_cast<size_t>(k)]) continue;
        const double vk = pen_.kkt(g[k], w_[k], lambda, k);
        if (vk > viol) {
          viol = vk;
          viol_k = k;
        }
      }
      out.kkt_violation = viol;
      if (trace_) {
        std::fprintf(stderr,
                     "    outer=%d obj=%.12f viol=%.3g at k=%d (w=%.3g g=%.3g) df=%d "
                     "stalls=%d\n",
                     outer, obj, viol, viol_k, viol_k >= 0 ? w_[viol_k] : 0.0,
                     viol_k >= 0 ? g[viol_k] : 0.0,
                     static_cast<int>((w_.array() != 0.0).count()), obj_stalls);
      }
      if (viol <= control_.kkt_tol) {
        out.converged = true;
        break;
      }
      // A numerically frozen objective over several rounds, with the residual
      // still above tolerance, is an iterate cycle (possible under a
      // nonconvex penalty): stop honestly rather than spin to the cap.
      obj_stalls = obj_moved ? 0 : obj_stalls + 1;
      if (outer > 0 && obj_stalls >= 5) break;
      // Progress requirement: if the residual has not halved within a window
      // of outer rounds, the iterate is orbiting a non-certifiable point
      // (ill-conditioned active block or a nonconvex-penalty cycle); stop and
      // report the honest residual rather than burn the full iteration cap.
      if (viol < best_viol) {
        if (viol < 0.5 * best_viol) best_viol_outer = outer;
        best_viol = viol;
      }
      if (outer - best_viol_outer >= control_.stall_patience) break;
      if (viol > 0.9 * last_viol) force *= 0.1;  // stalled: tighten subproblems
      last_viol = viol;
      const double inner_tol = std::max(force * viol, kInnerTolFloor);

      const bool progressed = solve_subproblem(lambda, inner_tol);
      if (!progressed && inner_tol <= kInnerTolFloor) break;  // numerical floor
    }
    out.iterations = outer;
    return finalize(out, lambda);
  }

  const Eigen::VectorXd& std_coefficients() const { return w_; }

 private:
  /// Recompute theta, eta-dependent state from scratch; false if eta > 700.
  bool refresh_state() {
    theta_.setZero();
    for (int k = 0; k < K_; ++k) {
      if (w_[k] == 0.0) continue;
      const double a = w_[k] / design_.standardization.scale[k];
      const double* zc = design_.Z.col(k).data();
      for (int m : design_.support(k)) theta_[m] += a * zc[m];
    }
    mu_.resize(M_);
    loglik_ = 0.0;
    for (int m = 0; m < M_; ++m) {
      const double eta = theta_[m] + c0_;
      if (eta > 700.0) return false;
      mu_[m] = scheme_.weights[m] * std::exp(eta);
      loglik_ += y_[m] * eta - mu_[m];
    }
    return std::isfinite(loglik_);
  }

  /// One IRLS quadratic subproblem solved by coordinate descent with
  /// active-set cycling.  Maintains A_m = W_m (r_m - theta_m) incrementally;
  /// centered columns never touch the residual vector off their support
  /// because the centering correction is folded into scalar bookkeeping.
  /// Stops when the per-pass stationarity excess (curvature times coordinate
  /// movement, gradient units) drops to inner_tol; returns whether any
  /// coordinate or the intercept moved at all.
  bool solve_subproblem(double lambda, double inner_tol) {
    const Eigen::VectorXd& W = mu_;  // Poisson working weights
    double S_W = W.sum();
    if (S_W <= 0.0) return false;

    // A_m = W_m (r_m - theta_m) with r the working response; algebraically
    // A_m = W_m * c0 + (y_m - W_m), which avoids forming r (W may underflow).
    Eigen::VectorXd A(M_);
    for (int m = 0; m < M_; ++m) A[m] = W[m] * c0_ + (y_[m] - W[m]);

    // Per-column sums u_k = sum W x, q_k = sum W x^2 over the support.
    Eigen::VectorXd u(K_), d(K_);
    for (int k = 0; k < K_; ++k) {
      if (excluded_[static_cast<size_t>(k)]) {
        u[k] = 0.0;
        d[k] = 1.0;
        continue;
      }
      const double* zc = design_.Z.col(k).data();
      double uk = 0.0, qk = 0.0;
      for (int m : design_.support(k)) {
        uk += W[m] * zc[m];
        qk += W[m] * zc[m] * zc[m];
      }
      u[k] = uk;
      const double c = design_.standardization.center[k];
      const double s = design_.standardization.scale[k];
      d[k] = (qk - 2.0 * c * uk + c * c * S_W) / (s * s * mu_hat_);
    }

    double S_A = A.sum();

    bool moved = false;
    auto pass = [&](bool full) -> double {
      // Stationarity excess in exact-gradient units: curvature times the
      // movement a coordinate takes toward its univariate minimizer.
      double excess = 0.0;
      // Unpenalized intercept step.
      const double d0 = (S_A - c0_ * S_W) / S_W;
      c0_ += d0;
      if (d0 != 0.0) moved = true;
      excess = std::abs(d0) * S_W / mu_hat_;
      for (int k = 0; k < K_; ++k) {
        if (excluded_[static_cast<size_t>(k)]) continue;
        if (!full && w_[k] == 0.0) continue;
        if (d[k] <= 1e-12) {  // no curvature: retire the coordinate
          if (w_[k] != 0.0) {
            apply_delta(k, -w_[k], W, A, S_A, u[k]);
            moved = true;
          }
          continue;
        }
        const auto& supp = design_.support(k);
        const double* zc = design_.Z.col(k).data();
        double acc = 0.0;
        for (int m : supp) acc += A[m] * zc[m];
        const double c = design_.standardization.center[k];
        const double s = design_.standardization.scale[k];
        const double g =
            (acc - c0_ * u[k] - c * (S_A - c0_ * S_W)) / (s * mu_hat_);
        const double z = g + d[k] * w_[k];
        const double wn = pen_.prox(z, d[k], lambda, k);
        const double delta = wn - w_[k];
        if (delta != 0.0) {
          apply_delta(k, delta, W, A, S_A, u[k]);
          moved = true;
          excess = std::max(excess, d[k] * std::abs(delta));
        }
      }
      return excess;
    };

    int passes = 0;
    double md = std::numeric_limits<double>::infinity();
    while (passes < control_.max_cd_passes) {
      md = pass(/*full=*/true);
      ++passes;
      if (md <= inner_tol) break;
      for (int cyc = 0; cyc < control_.full_sweep_every && passes < control_.max_cd_passes;
           ++cyc) {
        md = pass(/*full=*/false);
        ++passes;
        if (md <= inner_tol) break;
      }
    }
    cd_passes_total_ += passes;

    // Active-set Newton polish.  Coordinate descent's movement-based stop is
    // unreliable on ill-conditioned active blocks (tiny sweeps far from the
    // model optimum), so the frozen quadratic model is solved on the current
    // active block with dense SPD solves.  A sign-feasibility line search
    // walks each step only to the first zero crossing, retires the blocking
    // coordinates exactly, and re-solves the reduced block; the outer loop
    // re-certifies against the exact objective.
    double nu_warm = 0.0;
    for (int round = 0; round < 24; ++round) {
      std::vector<int> act;
      for (int k = 0; k < K_; ++k)
        if (!excluded_[static_cast<size_t>(k)] && w_[k] != 0.0) act.push_back(k);
      const int na = static_cast<int>(act.size());
      if (na == 0 || na > 500) break;

      Eigen::VectorXd sw = W.cwiseSqrt();
      Eigen::MatrixXd B(M_, na + 1);
      B.col(0) = sw;
      for (int j = 0; j < na; ++j) {
        const int k = act[j];
        const double c = design_.standardization.center[k];
        const double s = design_.standardization.scale[k];
        B.col(j + 1) = sw.cwiseProduct((design_.Z.col(k).array() - c).matrix()) / s;
      }
      Eigen::MatrixXd H = B.transpose() * B / mu_hat_;
      Eigen::VectorXd rhs(na + 1);
      rhs[0] = (S_A - c0_ * S_W) / mu_hat_;
      for (int j = 0; j < na; ++j) {
        const int k = act[j];
        const double* zc = design_.Z.col(k).data();
        double acc = 0.0;
        for (int m : design_.support(k)) acc += A[m] * zc[m];
        const double c = design_.standardization.center[k];
        const double s = design_.standardization.scale[k];
        const double g = (acc - c0_ * u[k] - c * (S_A - c0_ * S_W)) / (s * mu_hat_);
        rhs[j + 1] = g - pen_.grad(w_[k], lambda, k);
        H(j + 1, j + 1) += pen_.curv(w_[k], lambda, k);
      }

      // Trust region in linear-predictor space, enforced by
      // Levenberg-Marquardt damping.  H can be nearly singular (nodes with
      // underflowed weights contribute gradient but no curvature), in which
      // case the raw Newton step explodes along the degenerate direction;
      // uniformly rescaling it would also erase the useful directions, so
      // the ridge is escalated until the step fits the region instead.  The
      // radius only guards against exp() blow-ups: step quality is certified
      // against the exact objective by the outer ascent safeguard, and a
      // tight radius forces heavy damping along genuinely flat directions,
      // turning convergence into a geometric creep.
      constexpr double kEtaTrust = 64.0;
      const double diag_max = H.diagonal().maxCoeff();
      double nu = nu_warm;
      Eigen::VectorXd delta;
      for (int attempt = 0; attempt < 10; ++attempt) {
        Eigen::MatrixXd Hd = H;
        Hd.diagonal().array() += 1e-12 + nu;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
        Eigen::VectorXd cand;
        if (ldlt.info() == Eigen::Success) cand = ldlt.solve(rhs);
        // The step must ascend the model (H can be indefinite under SCAD's
        // concave branch) and stay inside the trust region.
        if (cand.size() == na + 1 && cand.allFinite() && cand.dot(rhs) > 0.0) {
          Eigen::VectorXd deta = Eigen::VectorXd::Zero(M_);
          double const_shift = cand[0];
          for (int j = 0; j < na; ++j) {
            const int k = act[j];
            const double a = cand[j + 1] / design_.standardization.scale[k];
            const double* zc = design_.Z.col(k).data();
            for (int m : design_.support(k)) deta[m] += a * zc[m];
            const_shift -= a * design_.standardization.center[k];
          }
          deta.array() += const_shift;
          if (deta.lpNorm<Eigen::Infinity>() <= kEtaTrust) {
            delta = std::move(cand);
            break;
          }
        }
        nu = nu == 0.0 ? 1e-8 * std::max(diag_max, 1e-300) : nu * 100.0;
      }
      if (delta.size() != na + 1) break;
      // Let the damping decay across rounds as the flat-direction gradient
      // shrinks, instead of re-escalating from scratch.
      nu_warm = nu / 100.0;

      // First breakpoint along the step: zero crossings (retirement) for
      // nonsmooth penalties, plus SCAD branch boundaries where the model's
      // curvature changes and must be rebuilt.
      double tstep = 1.0;
      if (pen_.nonsmooth()) {
        for (int j = 0; j < na; ++j) {
          const double wk = w_[act[j]], dk = delta[j + 1];
          if (dk == 0.0) continue;
          if ((wk > 0.0 && wk + dk < 0.0) || (wk < 0.0 && wk + dk > 0.0))
            tstep = std::min(tstep, -wk / dk);
          if (pen_.kind == PenaltyKind::Scad) {
            const double sg = wk > 0.0 ? 1.0 : -1.0;
            for (double edge : {lambda, pen_.shape * lambda}) {
              const double tb = (sg * edge - wk) / dk;
              if (tb > 1e-12 && tb < tstep) {
                const double a0 = std::abs(wk), a1 = std::abs(wk + dk);
                if ((a0 - edge) * (a1 - edge) < 0.0) tstep = tb;
              }
            }
          }
        }
      }
      if (trace_)
        std::fprintf(stderr,
                     "      polish r%d: na=%d nu=%.3g rhs_inf=%.3g delta_inf=%.3g "
                     "t=%.3g md_end=%.3g\n",
                     round, na, nu, rhs.lpNorm<Eigen::Infinity>(),
                     delta.lpNorm<Eigen::Infinity>(), tstep, md);

      c0_ += tstep * delta[0];
      if (delta[0] != 0.0) moved = true;
      for (int j = 0; j < na; ++j) {
        const int k = act[j];
        const double dw = tstep * delta[j + 1];
        if (dw != 0.0) {
          apply_delta(k, dw, W, A, S_A, u[k]);
          moved = true;
        }
      }
      // A full undamped step solves the model block exactly; a damped full
      // step does not (LM shrank it to fit the trust region), so keep
      // iterating rounds and let nu decay.
      if (tstep >= 1.0 && nu == 0.0) break;
      if (tstep >= 1.0) continue;
      // Retire coordinates pinned at the crossing so the reduced block is
      // strictly smaller and the round loop terminates.
      for (int j = 0; j < na; ++j) {
        const int k = act[j];
        if (std::abs(w_[k]) <= 1e-12 * std::abs(delta[j + 1])) {
          apply_delta(k, -w_[k], W, A, S_A, u[k]);
          w_[k] = 0.0;
        }
      }
    }
    return moved;
  }

  void apply_delta(int k, double delta, const Eigen::VectorXd& W, Eigen::VectorXd& A,
                   double& S_A, double u_k) {
    const double s = design_.standardization.scale[k];
    const double c = design_.standardization.center[k];
    const double a = delta / s;
    const double* zc = design_.Z.col(k).data();
    for (int m : design_.support(k)) {
      theta_[m] += a * zc[m];
      A[m] -= W[m] * a * zc[m];
    }
    S_A -= a * u_k;
    c0_ -= a * c;  // keep eta = theta + c0 consistent under centering
    w_[k] += delta;
  }

  FitResult finalize(FitResult out, double lambda) {
    out.lambda = lambda;
    out.cd_passes = cd_passes_total_;
    out.std_coefficients = w_;
    out.coefficients.resize(K_);
    for (int k = 0; k < K_; ++k)
      out.coefficients[k] = w_[k] / design_.standardization.scale[k];
    out.intercept = c0_;
    out.bt_loglik = loglik_;
    out.df = static_cast<int>((w_.array() != 0.0).count());
    return out;
  }

  const QuadratureScheme& scheme_;
  const LocalizedDesign& design_;
  SolverControl control_;
  int M_, K_;
  PenaltyEval pen_;
  double mu_hat_ = 0.0;
  int cd_passes_total_ = 0;
  bool trace_ = false;
  std::vector<std::uint8_t> excluded_;
  Eigen::VectorXd y_;

  // Current state: standardized coefficients, original-scale intercept, the
  // sparse part of the linear predictor, and cached weights/loglik.
  Eigen::VectorXd w_;
  double c0_ = 0.0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd mu_;
  double loglik_ = 0.0;
};

std::vector<double> lambda_grid(double lambda_max, const PathSpec& spec) {
  if (!spec.explicit_lambdas.empty()) return spec.explicit_lambdas;
  if (spec.length < 1) throw std::invalid_argument("PathSpec: length < 1");
  if (!(spec.min_ratio > 0.0) || spec.min_ratio > 1.0)
    throw std::invalid_argument("PathSpec: min_ratio must be in (0,1]");
  std::vector<double> grid(static_cast<size_t>(spec.length));
  if (spec.length == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double lr = std::log(spec.min_ratio);
  for (int i = 0; i < spec.length; ++i)
    grid[static_cast<size_t>(i)] = lambda_max * std::exp(lr * i / (spec.length - 1));
  return grid;
}

}  // namespace

double compute_lambda_max(const QuadratureScheme& scheme, const LocalizedDesign& design,
                          const PenaltySpec& penalty, const SolverControl& control) {
  PathSolver solver(scheme, design, penalty, control);
  return solver.lambda_max();
}

FitPath fit_path(const QuadratureScheme& scheme, const LocalizedDesign& design,
                 const PenaltySpec& penalty, const PathSpec& path,
                 const SolverControl& control) {
  PathSolver solver(scheme, design, penalty, control);
  FitPath out;
  out.mu_hat = solver.mu_hat();
  out.lambda_max = solver.lambda_max();
  out.lambdas = lambda_grid(out.lambda_max, path);
  out.fits.reserve(out.lambdas.size());
  for (size_t i = 0; i < out.lambdas.size(); ++i) {
    FitResult fit = solver.solve(out.lambdas[i]);
    if (fit.diverged) {
      out.truncated_at = static_cast<int>(i);
      out.error = "path truncated: linear predictor overflow at lambda index " +
                  std::to_string(i + 1);
      break;
    }
    out.fits.push_back(std::move(fit));
  }
  return out;
}

FitResult fit_single(const QuadratureScheme& scheme, const LocalizedDesign& design,
                     const PenaltySpec& penalty, double lambda,
                     const SolverControl& control) {
  PathSolver solver(scheme, design, penalty, control);
  return solver.solve(lambda);
}

FitResult fit_unpenalized(const QuadratureScheme& scheme, const LocalizedDesign& design,
                          const std::vector<int>& support_columns,
                          const SolverControl& control) {
  const int M = scheme.M();
  if (design.M() != M)
    throw std::invalid_argument("fit_unpenalized: design rows != quadrature nodes");
  const double n = static_cast<double>(scheme.n_data);
  const double area = scheme.window.area();

  FitResult out;
  out.coefficients = Eigen::VectorXd::Zero(design.K());
  out.std_coefficients = Eigen::VectorXd::Zero(design.K());

  // Deduplicate, drop excluded (constant) columns.
  std::vector<int> cols = support_columns;
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  std::vector<int> kept;
  for (int k : cols) {
    if (k < 0 || k >= design.K())
      throw std::out_of_range("fit_unpenalized: column index out of range");
    if (!design.standardization.constant[static_cast<size_t>(k)]) kept.push_back(k);
  }

  Eigen::VectorXd y(M);
  for (int m = 0; m < M; ++m) y[m] = scheme.labels[static_cast<size_t>(m)] ? 1.0 : 0.0;

  double c0 = n > 0 ? std::log(n / area) : -control.separation_cap;
  if (n <= 0.0) {
    out.intercept = c0;
    out.separated = true;
    out.converged = true;
    Eigen::VectorXd mu = scheme.weights * std::exp(c0);
    out.bt_loglik = (y.array() * c0).sum() - mu.sum();
    out.kkt_violation = std::abs((y - mu).sum());
    return out;
  }

  const int S = static_cast<int>(kept.size());
  Eigen::MatrixXd Adm(M, S + 1);  // [1 | standardized support columns]
  Adm.col(0).setOnes();
  for (int j = 0; j < S; ++j) {
    const int k = kept[static_cast<size_t>(j)];
    Adm.col(j + 1) = (design.Z.col(k).array() - design.standardization.center[k]) /
                     design.standardization.scale[k];
  }

  // Rank screen with null-model weights; non-pivot columns are dropped.
  {
    Eigen::VectorXd w0 = (scheme.weights * (n / area)).cwiseSqrt();
    Eigen::MatrixXd B = w0.asDiagonal() * Adm;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < S + 1) {
      std::vector<std::uint8_t> keep_flag(static_cast<size_t>(S + 1), 0);
      const auto& perm = qr.colsPermutation().indices();
      for (int i = 0; i < rank; ++i) keep_flag[static_cast<size_t>(perm[i])] = 1;
      keep_flag[0] = 1;  // the intercept always stays
      std::vector<int> kept2;
      Eigen::MatrixXd A2(M, std::count(keep_flag.begin(), keep_flag.end(), 1));
      int c = 0;
      A2.col(c++) = Adm.col(0);
      for (int j = 0; j < S; ++j) {
        if (keep_flag[static_cast<size_t>(j + 1)]) {
          A2.col(c++) = Adm.col(j + 1);
          kept2.push_back(kept[static_cast<size_t>(j)]);
        } else {
          out.dropped_columns.push_back(kept[static_cast<size_t>(j)]);
        }
      }
      Adm.swap(A2);
      kept.swap(kept2);
    }
  }
  const int P1 = static_cast<int>(Adm.cols());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(P1);
  beta[0] = c0;
  auto loglik_at = [&](const Eigen::VectorXd& b, bool& ok) {
    Eigen::VectorXd eta = Adm * b;
    if ((eta.array() > 700.0).any()) {
      ok = false;
      return -std::numeric_limits<double>::infinity();
    }
    ok = true;
    double acc = 0.0;
    for (int m = 0; m < M; ++m)
      acc += y[m] * eta[m] - scheme.weights[m] * std::exp(eta[m]);
    return acc;
  };

  bool ok = true;
  double ll = loglik_at(beta, ok);
  int it = 0;
  for (it = 0; it < control.max_newton; ++it) {
    Eigen::VectorXd eta = Adm * beta;
    Eigen::VectorXd mu(M);
    for (int m = 0; m < M; ++m) mu[m] = scheme.weights[m] * std::exp(eta[m]);
    Eigen::VectorXd score = Adm.transpose() * (y - mu);
    out.kkt_violation = score.lpNorm<Eigen::Infinity>();
    if (out.kkt_violation <= control.newton_tol) {
      out.converged = true;
      break;
    }
    Eigen::MatrixXd J = Adm.transpose() * mu.asDiagonal() * Adm;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(J);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success) {
      step = ldlt.solve(score);
    } else {
      J.diagonal().array() += 1e-10 * (1.0 + J.diagonal().maxCoeff());
      step = J.ldlt().solve(score);
    }
    // Backtracking: accept the first step that does not decrease the
    // likelihood and respects the overflow guard.
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      Eigen::VectorXd cand = beta + t * step;
      bool cok = true;
      const double cll = loglik_at(cand, cok);
      if (cok && cll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        beta = cand;
        ll = cll;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    // Separation cap on standardized coefficients (and the intercept).
    bool capped = false;
    for (int j = 0; j < P1; ++j) {
      if (std::abs(beta[j]) > control.separation_cap) {
        beta[j] = std::clamp(beta[j], -control.separation_cap, control.separation_cap);
        capped = true;
      }
    }
    if (capped) {
      out.separated = true;
      ll = loglik_at(beta, ok);
      break;
    }
  }
  out.iterations = it;
  out.bt_loglik = ll;

  // De-standardize into the full-length coefficient vector.
  double shift = 0.0;
  for (int j = 0; j < static_cast<int>(kept.size()); ++j) {
    const int k = kept[static_cast<size_t>(j)];
    out.std_coefficients[k] = beta[j + 1];
    out.coefficients[k] = beta[j + 1] / design.standardization.scale[k];
    shift += beta[j + 1] * design.standardization.center[k] / design.standardization.scale[k];
  }
  out.intercept = beta[0] - shift;
  out.df = static_cast<int>((out.coefficients.array() != 0.0).count());
  return out;
}

void write_path_csv(std::ostream& os, const FitPath& path) {
  os << "index,lambda,df,bt_loglik,converged\n";
  for (size_t i = 0; i < path.fits.size(); ++i) {
    const FitResult& f = path.fits[i];
    os << (i + 1) << ',' << fmt_double(f.lambda) << ',' << f.df << ','
       << fmt_double(f.bt_loglik) << ',' << (f.converged ? 1 : 0) << '\n';
  }
}

void write_path_coefficients_csv(std::ostream& os, const FitPath& path,
                                 const LocalizedDesign& design) {
  os << "index,predictor,r,estimate\n";
  for (size_t i = 0; i < path.fits.size(); ++i) {
    const Eigen::VectorXd& coef = path.fits[i].coefficients;
    for (int k = 0; k < coef.size(); ++k) {
      if (coef[k] == 0.0) continue;
      os << (i + 1) << ',' << (k / design.R + 1) << ',' << (k % design.R + 1) << ','
         << fmt_double(coef[k]) << '\n';
    }
  }
}

}  // namespace wavesel
