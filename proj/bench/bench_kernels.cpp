// Serial vs OpenMP timings for the three parallel kernels. The argument picks
// the execution mode: 0 serial, 1 parallel. Set MINORLAB_THREADS to cap threads.
#include <benchmark/benchmark.h>

#include "minorlab/audit.hpp"
#include "minorlab/density.hpp"
#include "minorlab/models.hpp"
#include "minorlab/sde.hpp"

using namespace minorlab;

namespace {

Exec mode(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

ModelSpec langevin() { return build_model("langevin", {{"n", "1"}}); }

SimConfig sim_config(std::size_t n) {
  SimConfig c;
  c.eps = 0.2;
  c.t_end = 1.0;
  c.dt_phys = 0.02;
  c.n_traj = n;
  c.seed = 11;
  c.x0 = {{0.0, 0.0}};
  return c;
}

void BM_simulate(benchmark::State& st) {
  const ModelSpec m = langevin();
  const SimConfig c = sim_config(20000);
  for (auto _ : st) benchmark::DoNotOptimize(simulate_ensemble(m, c, mode(st)));
  st.SetItemsProcessed(st.iterations() * c.n_traj * c.steps());
}

void BM_bin(benchmark::State& st) {
  const ModelSpec m = langevin();
  const EndpointSet e = simulate_ensemble(m, sim_config(200000));
  const GridSpec g = GridSpec::cube(2, -4.0, 4.0, 64);
  for (auto _ : st) benchmark::DoNotOptimize(bin_endpoints(e, g, m.H, 2.0, mode(st)));
  st.SetItemsProcessed(st.iterations() * e.n_traj());
}

void BM_v4_audit(benchmark::State& st) {
  const ModelSpec m = build_model("lorenz96", {{"d", "4"}, {"lambda", "1,0,1,0"}, {"sigma", "1,0,1,0"}});
  const auto pts = audit_points(m.d, Rational(10), 2000, 3);
  for (auto _ : st) benchmark::DoNotOptimize(v4_scan(m, pts, mode(st)));
  st.SetItemsProcessed(st.iterations() * pts.size());
}

}  // namespace

BENCHMARK(BM_simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bin)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_v4_audit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
