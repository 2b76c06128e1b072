#include <benchmark/benchmark.h>

#include "rswarm/channel.hpp"
#include "rswarm/experiments.hpp"
#include "rswarm/numerics.hpp"
#include "rswarm/qp.hpp"
#include "rswarm/rng.hpp"
#include "rswarm/scenario.hpp"
#include "rswarm/stability.hpp"

using namespace rswarm;

namespace {

CMat random_cmat(CounterRng& rng, Eigen::Index n) {
  CMat a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = rng.complex_normal();
  return a;
}

void BM_Det(benchmark::State& state) {
  CounterRng rng(1, Stream::Test);
  const CMat a = random_cmat(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cmat_det(a));
}
BENCHMARK(BM_Det)->Arg(8)->Arg(16)->Arg(40);

void BM_SolveQp(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  CounterRng rng(2, Stream::Test);
  RMat b(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) b(i, j) = rng.normal();
  QpProblem p;
  p.q = b * b.transpose() / static_cast<double>(n) + RMat::Identity(n, n);
  p.c = RVec(n);
  for (Eigen::Index i = 0; i < n; ++i) p.c(i) = rng.normal();
  p.lower = RVec::Zero(n);
  p.upper = RVec::Ones(n);
  p.ineq_a = RMat::Ones(1, n);
  p.ineq_b = RVec::Constant(1, 0.25 * static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p).x);
}
BENCHMARK(BM_SolveQp)->Arg(10)->Arg(40);

void BM_NyquistCircle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HrModel hr = HrModel::free_space(place_repeaters_circle(n, 1000.0));
  const SweepGrid grid{2e9, 1e6, 100.0};
  const double ag = alpha_g(free_space_hr(place_repeaters_circle(n, 1000.0), 2.0 * kPi * 2e9).cwiseAbs());
  const RepeaterConfig cfg{RVec::Constant(n, 0.5 * ag), RVec::Zero(n)};
  for (auto _ : state) benchmark::DoNotOptimize(nyquist_sweep(hr, cfg, grid).winding_number);
}
BENCHMARK(BM_NyquistCircle)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_OptimizeTrial(benchmark::State& state) {
  Config c = parse_config("");
  c.scenario.num_repeaters = static_cast<int>(state.range(0));
  const TrialSystem ts = make_trial(c, 0);
  for (auto _ : state) benchmark::DoNotOptimize(optimize(c, ts.cs).sum_rate);
}
BENCHMARK(BM_OptimizeTrial)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
