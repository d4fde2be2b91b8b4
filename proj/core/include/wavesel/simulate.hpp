#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "wavesel/geometry.hpp"

namespace wavesel {

/// Number of predictors with non-trivially-zero coefficient surfaces.
inline constexpr int kActiveBetaCount = 10;

/// True piecewise coefficient surface beta_p on the unit square, p in 1..10.
/// Surfaces are evaluated with half-open region boundaries exactly as their
/// case lists are written; the case list is applied first-match-wins.
/// Throws std::out_of_range for p outside 1..10.
double true_beta(int p, Point s);

/// Gaussian random field with exponential covariance
///   C(h) = sill * exp(-||h|| / range)
/// sampled at the cell centers of a resolution^2 grid by dense Cholesky
/// factorization (1e-10 diagonal jitter).  Identical seeds give identical
/// fields.
struct GrfSpec {
  double sill = 1.0;
  double range = 0.25;
  int resolution = 64;  ///< must be in [1, 128] (dense factor feasibility)
  std::uint64_t seed = 0;
};

/// Reusable sampler: the Cholesky factor depends only on (sill, range,
/// resolution, window) and is computed once, so many fields can be drawn
/// cheaply (one matrix-vector product each).
class GrfSampler {
 public:
  GrfSampler(double sill, double range, int resolution, const Window& window = Window::unit());
  ~GrfSampler();
  GrfSampler(GrfSampler&&) noexcept;
  GrfSampler& operator=(GrfSampler&&) noexcept;

  GridImage sample(std::uint64_t seed) const;
  int resolution() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around GrfSampler.
GridImage simulate_grf(const GrfSpec& spec, const Window& window = Window::unit());

/// Intercept b0 such that the grid Riemann integral of exp(b0 + field)
/// equals target_mu.  Throws std::invalid_argument if target_mu <= 0.
double calibrate_intercept(double target_mu, const GridImage& log_intensity_field);

/// Inhomogeneous Poisson sampler by thinning (Lewis-Shedler).  The intensity
/// is the bilinear interpolation of the given image; the dominating constant
/// is 1.05 * max cell value.  Deterministic given the seed.
PointPattern simulate_ipp(const GridImage& intensity, std::uint64_t seed);

/// Thomas cluster process modulated by a base log-intensity:
///   parents ~ homogeneous Poisson(kappa) on the window,
///   S(u) = (1/kappa) * sum_c G(u - c; sigma), G a normalized isotropic
///   Gaussian density, and offspring are drawn by thinning against
///   pi(u) = exp(base(u)) * S(u).  The thinning bound is the maximum of pi
///   over a bound_grid^2 evaluation grid times bound_safety; acceptance
///   probabilities above 1 are clamped and counted.
struct ThomasSpec {
  double kappa = 80.0;
  double sigma = 0.12;
  std::uint64_t seed = 0;   ///< default seed; the simulate_thomas argument wins
  int bound_grid = 256;
  double bound_safety = 1.2;
};

struct ThomasResult {
  PointPattern pattern;
  PointPattern parents;
  long clamped_candidates = 0;  ///< diagnostics: acceptance probs clamped to 1
};

ThomasResult simulate_thomas(const GridImage& base_log_intensity, const ThomasSpec& spec,
                             std::uint64_t seed);

/// Deterministic stream splitting: mixes a base seed with a stream id
/// (splitmix64 finalizer), used to give each replicate component its own
/// independent substream.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace wavesel
