#include <benchmark/benchmark.h>

#include "adtg/curriculum.hpp"
#include "adtg/diffusion.hpp"
#include "adtg/diversity.hpp"
#include "adtg/guidance.hpp"
#include "adtg/heightfield.hpp"
#include "adtg/learner.hpp"
#include "adtg/navsim.hpp"
#include "adtg/procgen.hpp"

namespace {

adtg::GaussianMixturePrior bench_prior(int side) {
  adtg::BumpPriorConfig config;
  return adtg::make_bump_prior(config, side, side, 0.25);
}

void BM_ReverseChain(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto prior = bench_prior(side);
  const adtg::AnalyticMixturePredictor pred(prior);
  const auto schedule = adtg::make_cosine_schedule(64);
  adtg::Rng rng(1);
  for (auto _ : state) {
    auto start = adtg::pure_noise_latent(side, side, 0.25, schedule, rng);
    benchmark::DoNotOptimize(adtg::reverse_sample(start, pred, schedule, rng));
  }
}
BENCHMARK(BM_ReverseChain)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  const auto prior = bench_prior(24);
  const adtg::AnalyticMixturePredictor pred(prior);
  const auto schedule = adtg::make_cosine_schedule(64);
  std::vector<adtg::TerrainRecord> dataset;
  for (int i = 0; i < 32; ++i) {
    dataset.push_back({static_cast<std::uint64_t>(i), adtg::sample_prior(prior, i + 1U), 0.3 + 0.02 * i, 0,
                       adtg::TerrainOrigin::kSeed});
  }
  adtg::Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(adtg::synthesize(dataset, static_cast<int>(state.range(0)), schedule, pred, {}, {}, rng));
  }
}
BENCHMARK(BM_Synthesize)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Variability(benchmark::State& state) {
  const auto prior = bench_prior(24);
  std::vector<adtg::Heightmap> maps;
  for (int i = 0; i < state.range(0); ++i) maps.push_back(adtg::sample_prior(prior, i + 7U));
  for (auto _ : state) benchmark::DoNotOptimize(adtg::raw_variability(maps, 8));
}
BENCHMARK(BM_Variability)->Arg(16)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Episode(benchmark::State& state) {
  const adtg::Terrain terrain(adtg::sample_prior(bench_prior(24), 3));
  const adtg::GoalSeekingPolicy policy;
  adtg::Rng rng(4);
  for (auto _ : state) {
    if (const auto spec = adtg::sample_episode(terrain, rng)) {
      benchmark::DoNotOptimize(adtg::run_episode(terrain, *spec, policy));
    }
  }
}
BENCHMARK(BM_Episode);

void BM_CemStep(benchmark::State& state) {
  const adtg::Terrain terrain(adtg::sample_prior(bench_prior(24), 5));
  const adtg::TrainerConfig config;
  auto cem = adtg::CemState::initial(config);
  std::uint64_t seed = 0;
  for (auto _ : state) cem = adtg::optimize_step(cem, terrain, config, ++seed).state;
}
BENCHMARK(BM_CemStep)->Unit(benchmark::kMillisecond);

void BM_HeightmapCodec(benchmark::State& state) {
  const auto map = adtg::sample_prior(bench_prior(32), 6);
  for (auto _ : state) benchmark::DoNotOptimize(adtg::decode_heightmap(adtg::encode_heightmap(map)));
}
BENCHMARK(BM_HeightmapCodec);

}  // namespace

BENCHMARK_MAIN();
