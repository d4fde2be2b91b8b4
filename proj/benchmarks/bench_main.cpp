// Micro-benchmarks for the hot paths: dictionary evaluation, quadrature and
// design assembly, likelihood evaluation, field simulation, and a small but
// real penalized path fit.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "wavesel/design.hpp"
#include "wavesel/quadrature.hpp"
#include "wavesel/simulate.hpp"
#include "wavesel/solver.hpp"
#include "wavesel/wavelet.hpp"

using namespace wavesel;

namespace {

std::vector<Point> grid_centers(int n) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) pts.push_back({(ix + 0.5) / n, (iy + 0.5) / n});
  return pts;
}

PointPattern uniform_pattern(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointPattern p;
  p.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.points.push_back({u(rng), u(rng)});
  return p;
}

/// Shared mid-size problem: 500 points, 10 GRF covariates, J=2 dictionary.
struct Problem {
  PointPattern pattern = uniform_pattern(500, 11);
  QuadratureScheme scheme = build_quadrature(pattern, Window::unit(), 17, 17);
  std::vector<GridImage> fields;
  std::vector<std::string> names;
  LocalizedDesign design;

  Problem() {
    const GrfSampler sampler(1.0, 0.25, 16);
    for (int p = 1; p <= 10; ++p) {
      fields.push_back(sampler.sample(static_cast<std::uint64_t>(p)));
      names.push_back("x" + std::to_string(p));
    }
    const CovariateTable table = covariates_at_nodes(fields, names, scheme);
    design = build_design(table, std::make_shared<const HaarBasis>(0, 2), scheme);
  }
};

const Problem& problem() {
  static const Problem p;
  return p;
}

}  // namespace

static void BM_BasisMatrix(benchmark::State& state) {
  const HaarBasis basis(0, static_cast<int>(state.range(0)));
  const std::vector<Point> pts = grid_centers(64);
  for (auto _ : state) benchmark::DoNotOptimize(basis.basis_matrix(pts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_BasisMatrix)->Arg(1)->Arg(2)->Arg(3);

static void BM_EvalBasis(benchmark::State& state) {
  const HaarBasis basis(0, 3);
  const std::vector<Point> pts = grid_centers(32);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(basis.eval_basis(pts[i]));
    i = (i + 1) % pts.size();
  }
}
BENCHMARK(BM_EvalBasis);

static void BM_BuildQuadrature(benchmark::State& state) {
  const PointPattern pattern = uniform_pattern(static_cast<int>(state.range(0)), 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_quadrature(pattern, Window::unit(), 17, 17));
}
BENCHMARK(BM_BuildQuadrature)->Arg(100)->Arg(500)->Arg(2000);

static void BM_BuildDesign(benchmark::State& state) {
  const Problem& p = problem();
  const CovariateTable table = covariates_at_nodes(p.fields, p.names, p.scheme);
  const auto basis = std::make_shared<const HaarBasis>(0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_design(table, basis, p.scheme));
}
BENCHMARK(BM_BuildDesign);

static void BM_BtLoglik(benchmark::State& state) {
  const Problem& p = problem();
  const Eigen::MatrixXd B = [&] {
    Eigen::MatrixXd m(p.design.M(), p.design.K() + 1);
    m.col(0).setOnes();
    m.rightCols(p.design.K()) = p.design.standardized_matrix();
    return m;
  }();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.05);
  Eigen::VectorXd c(B.cols());
  for (int k = 0; k < c.size(); ++k) c[k] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(bt_loglik(c, B, p.scheme));
}
BENCHMARK(BM_BtLoglik);

static void BM_GrfSamplerConstruct(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) {
    GrfSampler sampler(1.0, 0.25, res);
    benchmark::DoNotOptimize(sampler.resolution());
  }
}
BENCHMARK(BM_GrfSamplerConstruct)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_GrfDraw(benchmark::State& state) {
  static const GrfSampler sampler(1.0, 0.25, 32);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(++seed));
}
BENCHMARK(BM_GrfDraw);

static void BM_FitPathL1(benchmark::State& state) {
  const Problem& p = problem();
  PenaltySpec penalty;  // L1
  PathSpec path;
  path.length = 25;
  path.min_ratio = 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(p.scheme, p.design, penalty, path));
}
BENCHMARK(BM_FitPathL1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
