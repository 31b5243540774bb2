#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adtg/procgen.hpp"
#include "test_util.hpp"

using namespace adtg;
using adtg::test::error_code_of;

namespace {

double max_neighbour_step(const Heightmap& m) {
  double worst = 0.0;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (c + 1 < m.width()) worst = std::max(worst, std::abs(m.at(r, c + 1) - m.at(r, c)));
      if (r + 1 < m.height()) worst = std::max(worst, std::abs(m.at(r + 1, c) - m.at(r, c)));
    }
  }
  return worst;
}

GaussianMixturePrior single_prior(const Heightmap& mean, double sigma0) {
  return GaussianMixturePrior({{1.0, mean, sigma0}});
}

}  // namespace

TEST_SUITE("procgen") {
  TEST_CASE("slope grade sets the roughness") {
    for (double grade : {0.05, 0.3, 0.8}) {
      const auto m = generate_procedural({SlopeParams{grade}, 11}, 16, 16, 0.25);
      CHECK(compute_stats(m).roughness == doctest::Approx(grade).epsilon(1e-9));
    }
  }

  TEST_CASE("random uniform respects the neighbour step limit") {
    for (double step : {0.005, 0.02, 0.045}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = generate_procedural({RandomUniformParams{0.45, step}, seed}, 20, 17, 0.1);
        CHECK(max_neighbour_step(m) <= step + 1e-12);
        for (double v : m.data()) CHECK(std::abs(v) <= 0.45 + 1e-12);
      }
    }
  }

  TEST_CASE("wave amplitude couples to the count") {
    CHECK_NOTHROW(validate({WaveParams{4, 1.0}, 0}));
    CHECK(error_code_of([] { validate({WaveParams{4, 1.1}, 0}); }) == ErrorCode::kOutOfRange);
    CHECK(error_code_of([] { validate({WaveParams{21, 0.1}, 0}); }) == ErrorCode::kOutOfRange);
    CHECK(within_limits({WaveParams{20, 0.2}, 0}));
    CHECK_FALSE(within_limits({WaveParams{20, 0.21}, 0}));
  }

  TEST_CASE("out-of-range parameters are rejected by name") {
    auto code = [](ProcGenSpec s) { return error_code_of([&] { generate_procedural(s, 8, 8, 0.1); }); };
    CHECK(code({RandomUniformParams{0.5, 0.01}, 0}) == ErrorCode::kOutOfRange);
    CHECK(code({RandomUniformParams{0.1, 0.05}, 0}) == ErrorCode::kOutOfRange);
    CHECK(code({SlopeParams{0.9}, 0}) == ErrorCode::kOutOfRange);
    CHECK(code({DiscreteObstaclesParams{0.3, 0.5, 3}, 0}) == ErrorCode::kOutOfRange);
    CHECK(code({DiscreteObstaclesParams{1.0, 2.5, 3}, 0}) == ErrorCode::kOutOfRange);
    CHECK(code({DiscreteObstaclesParams{1.0, 0.5, 0}, 0}) == ErrorCode::kOutOfRange);
    CHECK(code({WaveParams{0, 0.5}, 0}) == ErrorCode::kOutOfRange);
  }

  TEST_CASE("obstacles sit on flat ground") {
    const auto m = generate_procedural({DiscreteObstaclesParams{2.0, 0.5, 3}, 5}, 24, 24, 0.25);
    int raised = 0;
    for (double v : m.data()) {
      CHECK((v == 0.0 || v == doctest::Approx(2.0)));
      raised += v > 0.0;
    }
    CHECK(raised > 0);
    CHECK(raised <= 3 * 3 * 3);  // 0.5 m boxes cover at most 3x3 cells each
  }

  TEST_CASE("wave height is bounded by count times amplitude") {
    const auto m = generate_procedural({WaveParams{3, 0.5}, 8}, 24, 24, 0.25);
    const auto s = compute_stats(m);
    CHECK(s.max <= 1.5 + 1e-12);
    CHECK(s.min >= -1.5 - 1e-12);
    CHECK(s.roughness > 0.0);
  }

  TEST_CASE("generation is deterministic in the seed") {
    const ProcGenSpec spec{RandomUniformParams{0.2, 0.02}, 77};
    CHECK(generate_procedural(spec, 12, 12, 0.1).bit_equal(generate_procedural(spec, 12, 12, 0.1)));
    const ProcGenSpec other{RandomUniformParams{0.2, 0.02}, 78};
    CHECK_FALSE(generate_procedural(spec, 12, 12, 0.1).bit_equal(generate_procedural(other, 12, 12, 0.1)));
  }

  TEST_CASE("sampled specs stay within the published ranges") {
    Rng rng(123);
    int kinds[kProcKindCount] = {};
    for (int i = 0; i < 4000; ++i) {
      const auto spec = sample_procedural_spec(rng);
      ++kinds[static_cast<int>(spec.kind())];
      CHECK(within_limits(spec));
    }
    for (int k : kinds) CHECK(k > 800);
  }

  TEST_CASE("kind names round trip") {
    for (int k = 0; k < kProcKindCount; ++k) {
      const auto kind = static_cast<ProcKind>(k);
      CHECK(parse_proc_kind(to_string(kind)) == kind);
    }
    CHECK(error_code_of([] { parse_proc_kind("lava"); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("vanishing sigma0 returns the mean map") {
    const auto mean = generate_procedural({WaveParams{2, 0.3}, 4}, 10, 10, 0.2);
    const auto prior = single_prior(mean, 1e-12);
    const auto s = sample_prior(prior, 99);
    for (std::size_t i = 0; i < mean.size(); ++i) CHECK(std::abs(s.data()[i] - mean.data()[i]) <= 1e-9);
  }

  TEST_CASE("equal-weight components are picked equally often") {
    const auto a = Heightmap::flat(4, 4, 1.0, 0.0);
    const auto b = Heightmap::flat(4, 4, 1.0, 1.0);
    const GaussianMixturePrior prior({{0.5, a, 0.1}, {0.5, b, 0.1}});
    Rng rng(7);
    int first = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) first += sample_prior_component(prior, rng).component == 0;
    CHECK(first / double(n) >= 0.47);
    CHECK(first / double(n) <= 0.53);
  }

  TEST_CASE("per-cell variance equals sigma0 squared") {
    const auto prior = single_prior(Heightmap::flat(4, 4, 1.0, 2.0), 0.5);
    Rng rng(11);
    const int n = 10000;
    std::vector<double> s(16, 0.0), s2(16, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto m = sample_prior(prior, rng);
      for (std::size_t c = 0; c < 16; ++c) {
        s[c] += m.data()[c];
        s2[c] += m.data()[c] * m.data()[c];
      }
    }
    for (std::size_t c = 0; c < 16; ++c) {
      const double mean = s[c] / n;
      const double var = (s2[c] - n * mean * mean) / (n - 1);
      CHECK(std::abs(var - 0.25) <= 0.05 * 0.25);
    }
  }

  TEST_CASE("mixture validation") {
    const auto a = Heightmap::flat(4, 4, 1.0);
    const auto b = Heightmap::flat(5, 4, 1.0);
    CHECK_THROWS_AS(GaussianMixturePrior({{0.6, a, 0.1}, {0.6, a, 0.1}}), Error);
    CHECK_THROWS_AS(GaussianMixturePrior({{0.5, a, 0.1}, {0.5, b, 0.1}}), Error);
    CHECK_THROWS_AS(GaussianMixturePrior({{1.0, a, 0.0}}), Error);
    CHECK_THROWS_AS(GaussianMixturePrior(std::vector<MixtureComponent>{}), Error);
  }

  TEST_CASE("bump prior weights follow the level decay") {
    BumpPriorConfig cfg;
    cfg.layouts = 2;
    cfg.levels = 3;
    cfg.level_decay = 0.5;
    const auto prior = make_bump_prior(cfg, 12, 12, 0.25);
    REQUIRE(prior.size() == 6);
    double total = 0.0;
    for (const auto& c : prior.components()) total += c.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // two layouts share each level: 1, 0.5, 0.25 per layout
    const double norm = 2.0 * (1.0 + 0.5 + 0.25);
    std::vector<double> w;
    for (const auto& c : prior.components()) w.push_back(c.weight);
    std::sort(w.begin(), w.end());
    CHECK(w.front() == doctest::Approx(0.25 / norm));
    CHECK(w.back() == doctest::Approx(1.0 / norm));
  }

  TEST_CASE("bump prior components grow rougher with level") {
    BumpPriorConfig cfg;
    cfg.layouts = 1;
    cfg.levels = 4;
    const auto prior = make_bump_prior(cfg, 16, 16, 0.25);
    double last = -1.0;
    for (const auto& c : prior.components()) {
      const double r = compute_stats(c.mean).roughness;
      CHECK(r > last);
      last = r;
    }
  }
}
