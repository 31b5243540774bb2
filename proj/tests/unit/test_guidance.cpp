#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "adtg/guidance.hpp"
#include "test_util.hpp"

using namespace adtg;
using adtg::test::error_code_of;

namespace {

Latent constant_latent(double v, int k = 3) {
  Latent z;
  z.step = k;
  z.width = 4;
  z.height = 4;
  z.resolution = 1.0;
  z.values.assign(16, v);
  return z;
}

SynthesisInput input_of(std::vector<double> rates, std::vector<double> weights, std::vector<double> values = {}) {
  SynthesisInput in;
  in.k = 3;
  for (std::size_t i = 0; i < rates.size(); ++i)
    in.sources.push_back({i, rates[i], constant_latent(values.empty() ? 0.0 : values[i])});
  in.weights = std::move(weights);
  return in;
}

std::vector<TerrainRecord> records(const std::vector<double>& rates, int side = 4) {
  std::vector<TerrainRecord> out;
  for (std::size_t i = 0; i < rates.size(); ++i)
    out.push_back({i, Heightmap::flat(side, side, 0.25, 0.01 * static_cast<double>(i)), rates[i], 0,
                   TerrainOrigin::kSeed});
  return out;
}

double hand_weight(double s) { return std::exp(-(s - 0.725) * (s - 0.725) / (0.25 * 0.25)); }

}  // namespace

TEST_SUITE("guidance") {
  TEST_CASE("weight at the target and one temperature away") {
    const WeightingParams p;
    CHECK(weight(p.target, p) == 1.0);
    CHECK(std::abs(weight(p.target + p.temperature, p) - std::exp(-1.0)) < 1e-12);
    CHECK(std::abs(weight(p.target - p.temperature, p) - std::exp(-1.0)) < 1e-12);
    CHECK(weight(0.6, p) == doctest::Approx(0.778801).epsilon(1e-6));
    CHECK(std::abs(weight(0.6, p) - std::exp(-0.25)) < 1e-15);
  }

  TEST_CASE("weight rejects rates outside [0, 1] and stays positive") {
    WeightingParams p;
    CHECK(error_code_of([&] { weight(-0.01, p); }) == ErrorCode::kOutOfRange);
    CHECK(error_code_of([&] { weight(1.01, p); }) == ErrorCode::kOutOfRange);
    CHECK(error_code_of([&] { log_weight(std::nan(""), p); }) == ErrorCode::kOutOfRange);
    p.temperature = 0.01;
    CHECK(weight(0.0, p) > 0.0);
    CHECK(log_weight(0.0, p) == doctest::Approx(-(0.725 * 0.725) / 1e-4));
  }

  TEST_CASE("weighting params validation") {
    WeightingParams p;
    p.temperature = 0.0;
    CHECK(error_code_of([&] { p.validate(); }) == ErrorCode::kInvalidConfig);
    p = {};
    p.band_lo = 0.9;
    CHECK(error_code_of([&] { p.validate(); }) == ErrorCode::kInvalidConfig);
    CHECK(WeightingParams{}.in_band(0.6));
    CHECK_FALSE(WeightingParams{}.in_band(0.59));
  }

  TEST_CASE("fusing two equal-weight latents averages them") {
    auto in = input_of({0.5, 0.6}, {1.0, 1.0});
    for (std::size_t i = 0; i < 16; ++i) {
      in.sources[0].latent.values[i] = static_cast<double>(i);
      in.sources[1].latent.values[i] = -3.0 * static_cast<double>(i) + 1.0;
    }
    const auto f = fuse_latents(in);
    for (std::size_t i = 0; i < 16; ++i) CHECK(f.values[i] == doctest::Approx(0.5 * (i + (-3.0 * i + 1.0))));
  }

  TEST_CASE("negligible weight leaves the first latent") {
    auto in = input_of({0.5, 0.6}, {0.3, 1e-300}, {1.25, -7.0});
    for (double v : fuse_latents(in).values) CHECK(std::abs(v - 1.25) < 1e-12);
  }

  TEST_CASE("three-source fusion") {
    const auto f = fuse_latents(input_of({0.1, 0.2, 0.3}, {1.0, 2.0, 1.0}, {0.0, 1.0, 2.0}));
    for (double v : f.values) CHECK(std::abs(v - 1.0) < 1e-12);
    CHECK(f.step == 3);
  }

  TEST_CASE("fusion input validation") {
    CHECK(error_code_of([] { fuse_latents(input_of({}, {})); }) == ErrorCode::kEmptyDataset);
    CHECK(error_code_of([] { predicted_success(input_of({}, {})); }) == ErrorCode::kEmptyDataset);
    CHECK(error_code_of([] { fuse_latents(input_of({0.5}, {0.0})); }) == ErrorCode::kInvalidArgument);
    CHECK(error_code_of([] { fuse_latents(input_of({0.5, 0.5}, {1.0})); }) == ErrorCode::kDimensionMismatch);
    auto wrong_step = input_of({0.5}, {1.0});
    wrong_step.sources[0].latent.step = 4;
    CHECK(error_code_of([&] { fuse_latents(wrong_step); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("predicted success") {
    CHECK(predicted_success(input_of({0.5, 0.9}, {1.0, 1.0})) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(predicted_success(input_of({0.3}, {0.01})) == doctest::Approx(0.3).epsilon(1e-15));
    const double w1 = std::exp(-4.41), w2 = std::exp(-0.81);
    const WeightingParams p;
    CHECK(weight(0.2, p) == doctest::Approx(w1).epsilon(1e-12));
    CHECK(weight(0.95, p) == doctest::Approx(w2).epsilon(1e-12));
    const double s = predicted_success(input_of({0.2, 0.95}, {weight(0.2, p), weight(0.95, p)}));
    CHECK(s == doctest::Approx((w1 * 0.2 + w2 * 0.95) / (w1 + w2)).epsilon(1e-12));
    CHECK(std::abs(s - 0.930) <= 0.001);
  }

  TEST_CASE("self-normalized mean with huge log weights") {
    const std::vector<double> x{1.0, 3.0};
    const std::vector<double> lw{1000.0, 1001.0};
    const double e = std::exp(1.0);
    CHECK(self_normalized_mean(x, lw) == doctest::Approx((1.0 + 3.0 * e) / (1.0 + e)).epsilon(1e-14));
    CHECK_THROWS_AS(self_normalized_mean(x, std::vector<double>{1.0}), Error);
  }

  TEST_CASE("candidate pool is capped, sorted and measured only") {
    std::vector<double> rates(2000, 0.5);
    auto data = records(rates);
    data[3].success_rate.reset();
    Rng rng(1);
    for (int t = 0; t < 5; ++t) {
      const auto pool = candidate_pool(data, 1000, rng);
      CHECK(pool.size() == 1000);
      CHECK(std::is_sorted(pool.begin(), pool.end()));
      CHECK(std::set<std::size_t>(pool.begin(), pool.end()).size() == 1000);
      CHECK(std::find(pool.begin(), pool.end(), 3u) == pool.end());
    }
    const auto small = candidate_pool(records({0.1, 0.2, 0.3}), 1000, rng);
    CHECK(small == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("two out-of-band records are both selected") {
    const auto data = records({0.1, 0.95});
    Rng rng(3);
    auto chosen = select_synthesis_sources(data, WeightingParams{}, SourceSelectionConfig{}, rng);
    std::sort(chosen.begin(), chosen.end());
    CHECK(chosen == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("all in-band records fall back to weighted draws") {
    const auto data = records({0.62, 0.65, 0.7, 0.72, 0.75, 0.8, 0.84});
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
      const auto chosen = select_synthesis_sources(data, WeightingParams{}, SourceSelectionConfig{}, rng);
      CHECK(chosen.size() == 4);
      CHECK(std::set<std::size_t>(chosen.begin(), chosen.end()).size() == 4);
    }
  }

  TEST_CASE("greedy correction adds the best record on the correcting side") {
    const auto data = records({0.3, 0.7, 0.8});
    SourceSelectionConfig cfg;
    cfg.initial_sources = 1;
    Rng rng(9);
    auto chosen = select_synthesis_sources(data, WeightingParams{}, cfg, rng);
    std::sort(chosen.begin(), chosen.end());
    CHECK(chosen == std::vector<std::size_t>{0, 1});
    const double pred = (hand_weight(0.3) * 0.3 + hand_weight(0.7) * 0.7) / (hand_weight(0.3) + hand_weight(0.7));
    CHECK(WeightingParams{}.in_band(pred));
  }

  TEST_CASE("correction stops at max_sources") {
    std::vector<double> rates(30, 0.05);
    rates.push_back(0.3);
    const auto data = records(rates);
    SourceSelectionConfig cfg;
    cfg.max_sources = 6;
    Rng rng(2);
    CHECK(select_synthesis_sources(data, WeightingParams{}, cfg, rng).size() <= 6);
  }

  TEST_CASE("synthesis from a single source at k = 1 reconstructs it") {
    BumpPriorConfig pc;
    const auto prior = make_bump_prior(pc, 16, 16, 0.25);
    const auto schedule = make_cosine_schedule(64);
    const AnalyticMixturePredictor pred(prior);
    const auto& src = prior.components()[5].mean;
    const TerrainRecord rec{0, src, 0.7, 0, TerrainOrigin::kSeed};
    const TerrainRecord* ptrs[] = {&rec};
    Rng rng(4);
    const auto out = synthesize_from_sources(ptrs, 1, schedule, pred, WeightingParams{}, rng);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      num += (out.map.data()[i] - src.data()[i]) * (out.map.data()[i] - src.data()[i]);
      den += src.data()[i] * src.data()[i];
    }
    CHECK(std::sqrt(num / den) < 0.15);
    CHECK(out.predicted_success == doctest::Approx(0.7));
    CHECK(out.source_ids == std::vector<std::uint64_t>{0});
  }

  TEST_CASE("twin sources halve the fused latent variance") {
    const auto schedule = make_cosine_schedule(64);
    const auto map = Heightmap::flat(4, 4, 1.0, 0.4);
    const int k = 20;
    const double ab = schedule.alpha_bar(k);
    const int n = 4000;
    double single = 0.0, twin = 0.0;
    for (int t = 0; t < n; ++t) {
      Rng rng(derive_seed(8, "twin", t));
      const auto a = forward_diffuse(map, k, schedule, rng);
      const auto b = forward_diffuse(map, k, schedule, rng);
      SynthesisInput in;
      in.k = k;
      in.sources = {{0, 0.7, a}, {1, 0.7, b}};
      in.weights = {weight(0.7, {}), weight(0.7, {})};
      const auto f = fuse_latents(in);
      for (std::size_t c = 0; c < 16; ++c) {
        const double mu = std::sqrt(ab) * 0.4;
        single += (a.values[c] - mu) * (a.values[c] - mu);
        twin += (f.values[c] - mu) * (f.values[c] - mu);
      }
    }
    single /= 16.0 * n;
    twin /= 16.0 * n;
    CHECK(single == doctest::Approx(1.0 - ab).epsilon(0.05));
    CHECK(twin == doctest::Approx((1.0 - ab) / 2.0).epsilon(0.05));
  }

  TEST_CASE("synthesis is deterministic in the seed") {
    BumpPriorConfig pc;
    pc.layouts = 2;
    pc.levels = 3;
    const auto prior = make_bump_prior(pc, 12, 12, 0.25);
    const auto schedule = make_cosine_schedule(32);
    const AnalyticMixturePredictor pred(prior);
    std::vector<TerrainRecord> data;
    for (std::size_t i = 0; i < prior.size(); ++i)
      data.push_back({i, prior.components()[i].mean, 0.15 * static_cast<double>(i), 0, TerrainOrigin::kSeed});
    Rng r1(77), r2(77);
    const auto a = synthesize(data, 12, schedule, pred, {}, {}, r1);
    const auto b = synthesize(data, 12, schedule, pred, {}, {}, r2);
    CHECK(a.map.bit_equal(b.map));
    CHECK(a.source_ids == b.source_ids);
    CHECK(encode_heightmap(a.map) == encode_heightmap(b.map));

    const auto batch1 = synthesize_batch(data, 3, 12, schedule, pred, {}, {}, 5, 1);
    const auto batch3 = synthesize_batch(data, 3, 12, schedule, pred, {}, {}, 5, 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(batch1[i].map.bit_equal(batch3[i].map));
  }

  TEST_CASE("synthesis needs measured records") {
    auto data = records({0.5});
    data[0].success_rate.reset();
    const auto schedule = make_cosine_schedule(8);
    const AnalyticMixturePredictor pred(GaussianMixturePrior({{1.0, data[0].map, 0.1}}));
    Rng rng(1);
    CHECK(error_code_of([&] { synthesize(data, 2, schedule, pred, {}, {}, rng); }) == ErrorCode::kEmptyDataset);
    CHECK(error_code_of([&] { synthesize({}, 2, schedule, pred, {}, {}, rng); }) == ErrorCode::kEmptyDataset);
  }

  TEST_CASE("terrain origin names round trip") {
    for (auto o : {TerrainOrigin::kSeed, TerrainOrigin::kSynthesized, TerrainOrigin::kProcedural})
      CHECK(parse_terrain_origin(to_string(o)) == o);
    CHECK_THROWS_AS(parse_terrain_origin("alien"), Error);
  }
}
