#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wfr/config.hpp"
#include "wfr/energy.hpp"
#include "wfr/frstep.hpp"
#include "wfr/spacetime.hpp"
#include "wfr/wstep.hpp"

using namespace wfr;

namespace {

void BM_ProjectParaboloid(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 2.0);
  std::vector<double> a(4096), b(4 * 4096);
  for (auto& v : a) v = d(rng);
  for (auto& v : b) v = d(rng);
  std::vector<double> work(4);
  for (auto _ : state) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      std::copy_n(b.begin() + std::ptrdiff_t(4 * k), 4, work.begin());
      acc += project_paraboloid(a[k], work);
    }
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(a.size()));
}
BENCHMARK(BM_ProjectParaboloid);

void BM_ProxInternal(benchmark::State& state) {
  const Nonlinearity f = state.range(0) == 0 ? Nonlinearity::entropy() : Nonlinearity::power(double(state.range(0)));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> z(-1.0, 3.0);
  std::vector<double> zs(4096);
  for (auto& v : zs) v = z(rng);
  for (auto _ : state) {
    double acc = 0.0;
    for (double v : zs) acc += prox_internal(f, 0.1, v, 0.2);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(zs.size()));
}
BENCHMARK(BM_ProxInternal)->Arg(0)->Arg(2)->Arg(100);

void BM_FisherRaoStep(benchmark::State& state) {
  const Grid g = Grid::box(64, 64);
  const Field mu = make_initial(g, "uniform:0.2+bump:0.5;0.5,0.2,0.8");
  const ReactionSpec spec = ReactionSpec::hele_shaw(g, 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(fisher_rao_step(mu, spec, 0.005).density[0]);
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.size()));
}
BENCHMARK(BM_FisherRaoStep)->Unit(benchmark::kMillisecond);

void BM_SpectralSolve(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid g = Grid::box(n, n);
  const SpaceTimeOperator op(g, 8, true);
  const SpectralPoissonSolver solver(op);
  std::vector<double> rhs(op.nodes(), 0.0), phi(op.nodes());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  for (auto& v : rhs) v = d(rng);
  for (auto _ : state) {
    solver.solve(rhs, phi);
    benchmark::DoNotOptimize(phi.data());
  }
}
BENCHMARK(BM_SpectralSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_WassersteinStep(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid g = Grid::box(n, n);
  const Field rho = make_initial(g, "uniform:0.2+bump:0.5;0.5,0.15,1");
  const EnergySpec e = EnergySpec::diffusion(Nonlinearity::power(2.0), Field(g));
  WStepConfig cfg;
  cfg.tol = 1e-4;
  int iterations = 0;
  for (auto _ : state) {
    const auto res = wasserstein_jko_step(rho, e, 0.01, cfg);
    iterations = res.report.iterations;
    benchmark::DoNotOptimize(res.density[0]);
  }
  state.counters["alg2_iterations"] = iterations;
}
BENCHMARK(BM_WassersteinStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
