#include <benchmark/benchmark.h>

#include <random>

#include "ngalerkin/galerkin.hpp"
#include "ngalerkin/metrics.hpp"
#include "ngalerkin/samplers.hpp"

using namespace ngalerkin;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

Ensemble uniform(const DomainBox& box, std::size_t m, std::uint64_t seed) {
  return uniform_ensemble(box, m, Stream(seed));
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "openmp" : "serial"); }

}  // namespace

static void BM_AssembleFokkerPlanck8(benchmark::State& state) {
  const ProblemDef p = fokker_planck_problem(8);
  const std::vector<double> theta = init_parameters(*p.network, 1);
  const Ensemble ens = uniform(DomainBox::cube(8, 0.5, 6.5), 500, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(p, theta, ens, 0.0, exec_of(state)));
  label(state);
}
BENCHMARK(BM_AssembleFokkerPlanck8)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_AssembleKdv(benchmark::State& state) {
  const ProblemDef p = kdv_problem();
  const std::vector<double> theta = init_parameters(*p.network, 3);
  const Ensemble ens = uniform(p.domain, 2000, 4);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(p, theta, ens, 0.0, exec_of(state)));
  label(state);
}
BENCHMARK(BM_AssembleKdv)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_SvgdSubstepAdvection(benchmark::State& state) {
  const ProblemDef p = advection_problem();
  SamplerConfig c;
  c.bandwidth = 0.1;
  c.step_size = 0.1;
  const PotentialContext ctx(p, init_parameters(*p.network, 5), init_parameters(*p.network, 6), 0.0, c);
  const Ensemble ens = uniform(p.domain, 1000, 7);
  for (auto _ : state) benchmark::DoNotOptimize(svgd_substep(ens, ctx, exec_of(state)));
  label(state);
}
BENCHMARK(BM_SvgdSubstepAdvection)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_EulerMaruyamaFokkerPlanck8(benchmark::State& state) {
  const SdeModel m = fokker_planck_sde(8);
  for (auto _ : state) benchmark::DoNotOptimize(euler_maruyama(m, 2000, 1e-3, {0.1}, 8, exec_of(state)));
  label(state);
}
BENCHMARK(BM_EulerMaruyamaFokkerPlanck8)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_KdeEntropy(benchmark::State& state) {
  std::mt19937_64 g(9);
  std::normal_distribution<double> n;
  std::vector<double> xs(2 * 4000);
  for (double& x : xs) x = n(g);
  for (auto _ : state) benchmark::DoNotOptimize(kde_entropy(xs, 2, KdeBandwidth::silverman(), exec_of(state)));
  label(state);
}
BENCHMARK(BM_KdeEntropy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
