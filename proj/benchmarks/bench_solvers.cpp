#include <benchmark/benchmark.h>

#include <random>

#include "hybridrisk/qp.hpp"
#include "hybridrisk/surface.hpp"

namespace {

using namespace hybridrisk;

// Random PD matrix with eigenvalues in [0.5, 2].
Eigen::MatrixXd random_pd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  Eigen::VectorXd vals(n);
  for (int i = 0; i < n; ++i) vals(i) = unif(rng);
  return q * vals.asDiagonal() * q.transpose();
}

RiskModel make_model(int n) {
  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i) mu(i) = 0.05 + 0.1 * i / n;
  return RiskModel(random_pd(n, 1), random_pd(n, 2), mu);
}

void BM_ClosedForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HybridMatrix m{0.5, 0.5 * random_pd(n, 1) + 0.5 * random_pd(n, 2)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_closed_form(m));
  }
}
BENCHMARK(BM_ClosedForm)->Arg(10)->Arg(50)->Arg(200);

void BM_LongOnly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HybridMatrix m{0.5, 0.5 * random_pd(n, 1) + 0.5 * random_pd(n, 2)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_long_only(m));
  }
}
BENCHMARK(BM_LongOnly)->Arg(10)->Arg(50)->Arg(200);

void BM_Frontier(benchmark::State& state) {
  const RiskModel model = make_model(static_cast<int>(state.range(0)));
  std::vector<double> grid;
  for (double v = 0.0; v <= 1.0 + 1e-12; v += 0.05) grid.push_back(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(risk_risk_frontier(model, grid, /*long_only=*/true));
  }
}
BENCHMARK(BM_Frontier)->Arg(10)->Arg(50);

void BM_FullSurface(benchmark::State& state) {
  const RiskModel model = make_model(static_cast<int>(state.range(0)));
  std::vector<double> lambdas;
  for (double v = 0.05; v <= 0.95 + 1e-12; v += 0.05) lambdas.push_back(v);
  const std::vector<double> mu0s = default_mu0_grid(model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(full_surface(model, mu0s, lambdas, /*long_only=*/true));
  }
}
BENCHMARK(BM_FullSurface)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
