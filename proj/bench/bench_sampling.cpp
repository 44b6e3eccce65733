// Sampling throughput: OpenMP-parallel vs serial reference path, on the
// surrogate model (cheap, overhead-dominated) and on the coarsest wave-solver
// levels (compute-dominated).

#include <benchmark/benchmark.h>

#include <memory>

#include "mlmc_seis/config.hpp"
#include "mlmc_seis/data.hpp"
#include "mlmc_seis/model.hpp"
#include "mlmc_seis/pool.hpp"
#include "mlmc_seis/sampling.hpp"

namespace {

using namespace mlmcseis;

void BM_SurrogateSamples(benchmark::State& state) {
  const SurrogateModel model(SurrogateSpec{});
  const SamplingOptions opts{static_cast<int>(state.range(1)), state.range(1) == 0};
  std::uint64_t run = 0;
  for (auto _ : state) {
    SamplePool pool(PoolProvenance{"S", "surrogate", "bench"});
    run_samples(model, 3, SampleKind::kCoupled, ++run, 0, static_cast<std::uint64_t>(state.range(0)), pool, opts);
    benchmark::DoNotOptimize(pool.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
// Second argument: worker count, 0 = serial reference path.
BENCHMARK(BM_SurrogateSamples)->Args({4096, 0})->Args({4096, 1})->Args({4096, 2})->Args({4096, 4});

std::shared_ptr<const DataSet> small_data(const WaveSetup& setup) {
  SynthRequest req;
  req.source = setup.source;
  req.material = nominal_material(setup.medium);
  req.geometry = setup.geometry;
  req.options = setup.options;
  req.fine_level = 1;
  req.hierarchy_max = 0;
  req.rate = 10.0;
  req.sigma = 0.0;
  return std::make_shared<DataSet>(generate_synthetic(req, setup.medium));
}

WaveSetup small_setup() {
  WaveSetup s;
  std::vector<LayerSpec> layers{{2000, 2500, 3529, 6035, 300}, {std::nullopt, 2900, 4423, 7563, 800}};
  s.medium = LayeredMedium(layers);
  s.uncertainty = UncertaintySpec{0.1, 0.1, 1.64, 1.78};
  s.source.x_s = 0;
  s.source.d_s = 3000;
  s.source.moment = {1e13, -1e13, 2e13};
  s.source.f0 = 1.0;
  s.source.t0 = -1.2;
  s.source.horizon = 4.0;
  s.geometry.receiver_offsets = {3000, 6000};
  s.options.hierarchy = Hierarchy{1000, 0.05, 0.45, 1};
  s.geometry.pad_x = s.geometry.pad_z = 20000;
  s.options.sponge_width = 10000;
  return s;
}

void BM_SolverSamples(benchmark::State& state) {
  const auto setup = small_setup();
  const WaveModel model(setup, small_data(setup), QoiKind::kE);
  const SamplingOptions opts{static_cast<int>(state.range(0)), state.range(0) == 0};
  std::uint64_t run = 0;
  for (auto _ : state) {
    SamplePool pool(PoolProvenance{"E", "solver", "bench"});
    run_samples(model, 0, SampleKind::kFineOnly, ++run, 0, 16, pool, opts);
    benchmark::DoNotOptimize(pool.size());
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_SolverSamples)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
