#include "wavesel/simulate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace wavesel {

double true_beta(int p, Point s) {
  const double sx = s.x, sy = s.y;
  const double rt2 = std::numbers::sqrt2;
  // Case lists are evaluated top to bottom, first match wins, boundaries
  // exactly as written (mixed <= / < across surfaces is intentional).
  switch (p) {
    case 1:
      if (sx >= 0.0 && sx < 0.5 && sy >= 0.0 && sy < 0.5) return 1.0;
      if (sx >= 0.5 && sy >= 0.5) return -1.0;
      return 0.0;
    case 2:
      if (sx < 0.5 && sy < 0.5) return 1.0;
      if (sx >= 0.5 && sx < 0.75 && sy >= 0.5 && sy < 0.75) return 0.5;
      if (sx >= 0.75 && sy >= 0.75) return 0.0;
      return -1.0;
    case 3: return sx <= 0.5 ? 1.0 : 0.0;
    case 4: return sy <= 0.5 ? 1.0 : 0.0;
    case 5:
      if (sx <= 0.5 && sy <= 0.5) return rt2;
      if (sx <= 0.5 && sy > 0.5) return 1.0;
      return 0.0;
    case 6: return sx + sy <= 0.5 ? rt2 : 0.0;
    case 7: return sx - sy <= 0.5 ? rt2 : 0.0;
    case 8: return sx + sy <= 1.5 ? rt2 : 0.0;
    case 9: return sx - sy >= -0.5 ? rt2 : 0.0;
    case 10: {
      const double a = sx + sy, d = sx - sy;
      if (a >= 0.5 && a <= 1.5 && d <= -0.5) return 1.0;
      if (a >= 0.5 && a <= 1.5 && d >= 0.5) return 1.0;
      if (a >= 0.5 && a <= 1.5 && std::abs(d) <= 0.5) return 0.5;
      if (a <= 0.5 && std::abs(d) <= 0.5) return rt2;
      if (a <= 0.5 && a >= 1.5) return -1.0;  // empty region; kept as written
      return 0.0;
    }
    default:
      throw std::out_of_range("true_beta: p must be in 1..10");
  }
}

// ---------------------------------------------------------------------------
// Gaussian random field

struct GrfSampler::Impl {
  int resolution;
  Window window;
  Eigen::MatrixXd chol;  // lower factor of C + 1e-10 I
};

GrfSampler::GrfSampler(double sill, double range, int resolution, const Window& window)
    : impl_(new Impl) {
  if (sill <= 0.0 || range <= 0.0)
    throw std::invalid_argument("GrfSampler: sill and range must be positive");
  if (resolution < 1 || resolution > 128)
    throw std::invalid_argument("GrfSampler: resolution must be in [1,128]");
  window.validate();
  impl_->resolution = resolution;
  impl_->window = window;

  const int n = resolution, cells = n * n;
  const double dx = window.width() / n, dy = window.height() / n;
  Eigen::MatrixXd C(cells, cells);
  for (int a = 0; a < cells; ++a) {
    const double xa = (a % n + 0.5) * dx, ya = (a / n + 0.5) * dy;
    for (int b = 0; b <= a; ++b) {
      const double hx = xa - (b % n + 0.5) * dx, hy = ya - (b / n + 0.5) * dy;
      const double c = sill * std::exp(-std::sqrt(hx * hx + hy * hy) / range);
      C(a, b) = c;
      C(b, a) = c;
    }
    C(a, a) += 1e-10;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("GrfSampler: covariance factorization failed");
  impl_->chol = llt.matrixL();
}

GrfSampler::~GrfSampler() = default;
GrfSampler::GrfSampler(GrfSampler&&) noexcept = default;
GrfSampler& GrfSampler::operator=(GrfSampler&&) noexcept = default;
int GrfSampler::resolution() const { return impl_->resolution; }

GridImage GrfSampler::sample(std::uint64_t seed) const {
  const int n = impl_->resolution, cells = n * n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(cells);
  for (int i = 0; i < cells; ++i) z[i] = gauss(rng);
  Eigen::VectorXd f = impl_->chol.template triangularView<Eigen::Lower>() * z;
  GridImage g(n, n, impl_->window);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) g.values(iy, ix) = f[iy * n + ix];
  return g;
}

GridImage simulate_grf(const GrfSpec& spec, const Window& window) {
  return GrfSampler(spec.sill, spec.range, spec.resolution, window).sample(spec.seed);
}

// ---------------------------------------------------------------------------

double calibrate_intercept(double target_mu, const GridImage& field) {
  if (!(target_mu > 0.0)) throw std::invalid_argument("calibrate_intercept: target_mu <= 0");
  // log of the Riemann integral of exp(field), max-shifted for stability.
  const double fmax = field.values.maxCoeff();
  const double s = (field.values.array() - fmax).exp().sum() * field.cell_area();
  return std::log(target_mu) - (fmax + std::log(s));
}

PointPattern simulate_ipp(const GridImage& intensity, std::uint64_t seed) {
  if (intensity.values.minCoeff() < 0.0)
    throw std::invalid_argument("simulate_ipp: negative intensity value");
  PointPattern out;
  out.window = intensity.window;
  const double vmax = intensity.values.maxCoeff();
  if (vmax <= 0.0) return out;

  // Dominating constant: bilinear interpolation never exceeds the max cell
  // value, so 1.05 * vmax is a strict bound.
  const double bound = 1.05 * vmax;
  const Window& w = intensity.window;
  std::mt19937_64 rng(seed);
  std::poisson_distribution<long> count(bound * w.area());
  std::uniform_real_distribution<double> ux(w.x0, w.x1), uy(w.y0, w.y1), u01(0.0, 1.0);
  const long n_cand = count(rng);
  for (long i = 0; i < n_cand; ++i) {
    Point p{ux(rng), uy(rng)};
    const double u = u01(rng);
    if (u * bound <= intensity.bilinear(p)) out.points.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thomas cluster process

namespace {

// Exact cluster-field evaluator.  Parents are bucketed on a coarse grid and
// summation is truncated at 8 sigma, where the omitted Gaussian mass is below
// double precision.
class ClusterField {
 public:
  ClusterField(const std::vector<Point>& parents, double sigma, double kappa, const Window& w)
      : parents_(parents), window_(w), sigma_(sigma) {
    norm_ = 1.0 / (2.0 * std::numbers::pi * sigma * sigma * kappa);
    inv2s2_ = 1.0 / (2.0 * sigma * sigma);
    radius_ = 8.0 * sigma;
    cell_ = std::max(sigma, std::max(w.width(), w.height()) / 512.0);
    bx_ = std::max(1, static_cast<int>(std::ceil(w.width() / cell_)));
    by_ = std::max(1, static_cast<int>(std::ceil(w.height() / cell_)));
    buckets_.resize(static_cast<size_t>(bx_) * by_);
    for (size_t i = 0; i < parents.size(); ++i) {
      int ix = std::clamp(static_cast<int>((parents[i].x - w.x0) / cell_), 0, bx_ - 1);
      int iy = std::clamp(static_cast<int>((parents[i].y - w.y0) / cell_), 0, by_ - 1);
      buckets_[static_cast<size_t>(iy) * bx_ + ix].push_back(static_cast<int>(i));
    }
  }

  double operator()(Point u) const {
    const double r2 = radius_ * radius_;
    int ix0 = std::clamp(static_cast<int>((u.x - radius_ - window_.x0) / cell_), 0, bx_ - 1);
    int ix1 = std::clamp(static_cast<int>((u.x + radius_ - window_.x0) / cell_), 0, bx_ - 1);
    int iy0 = std::clamp(static_cast<int>((u.y - radius_ - window_.y0) / cell_), 0, by_ - 1);
    int iy1 = std::clamp(static_cast<int>((u.y + radius_ - window_.y0) / cell_), 0, by_ - 1);
    double acc = 0.0;
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        for (int id : buckets_[static_cast<size_t>(iy) * bx_ + ix]) {
          const double dx = u.x - parents_[static_cast<size_t>(id)].x;
          const double dy = u.y - parents_[static_cast<size_t>(id)].y;
          const double d2 = dx * dx + dy * dy;
          if (d2 <= r2) acc += std::exp(-d2 * inv2s2_);
        }
    return norm_ * acc;
  }

 private:
  const std::vector<Point>& parents_;
  Window window_;
  double sigma_, norm_, inv2s2_, radius_, cell_;
  int bx_ = 1, by_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace

ThomasResult simulate_thomas(const GridImage& base_log_intensity, const ThomasSpec& spec,
                             std::uint64_t seed) {
  if (spec.kappa <= 0.0 || spec.sigma <= 0.0)
    throw std::invalid_argument("simulate_thomas: kappa and sigma must be positive");
  if (spec.bound_grid < 1 || spec.bound_safety < 1.0)
    throw std::invalid_argument("simulate_thomas: bad bound parameters");
  const Window& w = base_log_intensity.window;

  ThomasResult out;
  out.pattern.window = w;
  out.parents.window = w;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(w.x0, w.x1), uy(w.y0, w.y1), u01(0.0, 1.0);

  std::poisson_distribution<long> parent_count(spec.kappa * w.area());
  const long n_par = parent_count(rng);
  out.parents.points.reserve(static_cast<size_t>(n_par));
  for (long i = 0; i < n_par; ++i) out.parents.points.push_back({ux(rng), uy(rng)});
  if (n_par == 0) return out;  // S == 0, hence an empty offspring pattern

  ClusterField S(out.parents.points, spec.sigma, spec.kappa, w);
  auto intensity = [&](Point u) {
    return std::exp(base_log_intensity.bilinear(u)) * S(u);
  };

  // Thinning bound: max over the evaluation grid, inflated by the safety
  // factor; acceptance ratios above one are clamped and counted.
  const int G = spec.bound_grid;
  double pimax = 0.0;
  const double gdx = w.width() / G, gdy = w.height() / G;
  for (int iy = 0; iy < G; ++iy)
    for (int ix = 0; ix < G; ++ix)
      pimax = std::max(pimax,
                       intensity({w.x0 + (ix + 0.5) * gdx, w.y0 + (iy + 0.5) * gdy}));
  const double bound = spec.bound_safety * pimax;
  if (bound <= 0.0) return out;

  std::poisson_distribution<long> cand_count(bound * w.area());
  const long n_cand = cand_count(rng);
  for (long i = 0; i < n_cand; ++i) {
    Point p{ux(rng), uy(rng)};
    const double u = u01(rng);
    const double ratio = intensity(p) / bound;
    if (ratio > 1.0) ++out.clamped_candidates;
    if (u <= ratio) out.pattern.points.push_back(p);
  }
  return out;
}

std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace wavesel
