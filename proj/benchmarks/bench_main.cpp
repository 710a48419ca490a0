#include <benchmark/benchmark.h>

#include "fmgls/fmgls.hpp"

using namespace fmgls;

namespace {

BiamDecomposition make_filter(int n, int T, int q) {
  DgpConfig c;
  c.n = n;
  c.T = std::max(T, 10);
  c.set_rho(0.5);
  c.seed = 7;
  const SimulatedPanel p = generate(c);
  return BiamDecomposition(fit_var_ladder(p.data.differences(), q), T);
}

void BM_QuadraticForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int T = static_cast<int>(state.range(1));
  const int q = static_cast<int>(state.range(2));
  const BiamDecomposition bd = make_filter(n, T, q);
  Rng rng(1);
  Matrix x(n * T, 4 * n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_form(bd, x, x));
  state.SetItemsProcessed(state.iterations() * n * T);
}
BENCHMARK(BM_QuadraticForm)->Args({3, 100, 2})->Args({3, 500, 4})->Args({5, 500, 4})->Args({5, 2000, 8});

void BM_Estimator(benchmark::State& state, Method m) {
  DgpConfig c;
  c.n = static_cast<int>(state.range(0));
  c.T = static_cast<int>(state.range(1));
  c.set_rho(0.5);
  c.seed = 11;
  const SimulatedPanel p = generate(c);
  const CprSpec spec = simulation_spec(c.n);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(spec, p.data, m).beta);
}
BENCHMARK_CAPTURE(BM_Estimator, fm_sols, Method::sols_fm)->Args({3, 100})->Args({5, 500});
BENCHMARK_CAPTURE(BM_Estimator, fm_sur, Method::sur_fm)->Args({3, 100})->Args({5, 500});
BENCHMARK_CAPTURE(BM_Estimator, fm_gls, Method::fgls_fm)->Args({3, 100})->Args({5, 500});

void BM_CointegrationTest(benchmark::State& state) {
  DgpConfig c;
  c.setting = Setting::C_size;
  c.n = 3;
  c.T = static_cast<int>(state.range(0));
  c.seed = 13;
  const SimulatedPanel p = generate(c);
  const EstimationResult g = estimate(simulation_spec(3), p.data, Method::fgls_fm);
  for (auto _ : state) benchmark::DoNotOptimize(cointegration_test(g, KpssVariant::biam, 0.05).k_max);
}
BENCHMARK(BM_CointegrationTest)->Arg(200)->Arg(500);

void BM_LimitCdf(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(critical_value(n, 0.05 / 6));
}
BENCHMARK(BM_LimitCdf)->Arg(1)->Arg(6);

}  // namespace
BENCHMARK_MAIN();
