#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "adtg/mlp_predictor.hpp"
#include "test_util.hpp"

using namespace adtg;
using adtg::test::error_code_of;

namespace {

std::vector<Heightmap> gaussian_dataset(int n, int side, double sigma0, std::uint64_t seed) {
  const auto mean = adtg::test::map_from(side, side, 0.25, [](int r, int c) { return 0.3 * std::sin(0.5 * r + 0.2 * c); });
  const GaussianMixturePrior prior({{1.0, mean, sigma0}});
  std::vector<Heightmap> out;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) out.push_back(sample_prior(prior, rng));
  return out;
}

double window_mean(const std::vector<double>& v, std::size_t from, std::size_t n) {
  return std::accumulate(v.begin() + from, v.begin() + from + n, 0.0) / n;
}

}  // namespace

TEST_SUITE("mlp_predictor") {
  TEST_CASE("step embedding is sinusoidal and bounded") {
    const auto e = step_embedding(7, 8);
    REQUIRE(e.size() == 8);
    for (double v : e) CHECK(std::abs(v) <= 1.0);
    CHECK(step_embedding(7, 8) == e);
    CHECK(step_embedding(8, 8) != e);
  }

  TEST_CASE("training lowers the loss on a single-gaussian dataset") {
    const auto data = gaussian_dataset(200, 16, 0.3, 1);
    const auto s = make_cosine_schedule(64);
    PredictorTrainingConfig cfg;
    cfg.steps = 2000;
    const auto trained = train_predictor(data, s, cfg, 5);
    REQUIRE(trained.loss_history.size() == 2000);
    CHECK(window_mean(trained.loss_history, 1950, 50) < 0.8 * window_mean(trained.loss_history, 0, 50));
  }

  TEST_CASE("trained model beats the zero predictor at k = 1 on a constant map") {
    const std::vector<Heightmap> data{Heightmap::flat(8, 8, 0.25, 0.7)};
    const auto s = make_cosine_schedule(64);
    PredictorTrainingConfig cfg;
    cfg.steps = 1500;
    cfg.hidden = 32;
    const auto trained = train_predictor(data, s, cfg, 3);
    Rng rng(99);
    double model_err = 0.0, zero_err = 0.0;
    for (int t = 0; t < 200; ++t) {
      std::vector<double> eps(64);
      for (auto& e : eps) e = rng.normal();
      Latent z = Latent::from_map(data[0], 1);
      const double ab = s.alpha_bar(1);
      for (std::size_t i = 0; i < eps.size(); ++i) z.values[i] = std::sqrt(ab) * 0.7 + std::sqrt(1.0 - ab) * eps[i];
      const auto pred = trained.model.predict(z, s);
      for (std::size_t i = 0; i < eps.size(); ++i) {
        model_err += (pred[i] - eps[i]) * (pred[i] - eps[i]);
        zero_err += eps[i] * eps[i];
      }
    }
    CHECK(model_err < zero_err);
  }

  TEST_CASE("gradient matches central finite differences") {
    const auto data = gaussian_dataset(8, 6, 0.3, 2);
    const auto s = make_cosine_schedule(16);
    MlpNoisePredictor model(36, 12, 4, 7);
    Rng rng(4);
    const TrainingBatch batch = sample_training_batch(data, s, 5, rng);
    std::vector<double> grad;
    model.loss_and_gradient(batch, grad);
    REQUIRE(grad.size() == model.parameter_count());
    const auto base = model.parameters();
    const std::size_t stride = base.size() / 10;
    for (int j = 0; j < 10; ++j) {
      const std::size_t i = j * stride + 3;
      const double h = 1e-5;
      auto p = base;
      p[i] += h;
      model.set_parameters(p);
      const double up = model.loss(batch);
      p[i] -= 2.0 * h;
      model.set_parameters(p);
      const double down = model.loss(batch);
      model.set_parameters(base);
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(fd - grad[i]) <= 1e-4 * std::max(std::abs(fd), 1e-6));
    }
  }

  TEST_CASE("serialization round trip is bit exact") {
    MlpNoisePredictor model(16, 8, 4, 11);
    const auto bytes = model.encode();
    const auto back = MlpNoisePredictor::decode(bytes);
    CHECK(back.parameters() == model.parameters());
    CHECK(back.encode() == bytes);
    CHECK(back.embedding_dim() == 4);

    adtg::test::TempDir dir("mlp");
    model.save(dir / "p.bin");
    CHECK(MlpNoisePredictor::load(dir / "p.bin").parameters() == model.parameters());
  }

  TEST_CASE("malformed predictor blobs") {
    const auto bytes = MlpNoisePredictor(16, 8, 4, 11).encode();
    auto magic = bytes;
    magic[1] ^= 0xff;
    CHECK(error_code_of([&] { MlpNoisePredictor::decode(magic); }) == ErrorCode::kBadMagic);
    auto cut = bytes;
    cut.resize(bytes.size() - 1);
    CHECK(error_code_of([&] { MlpNoisePredictor::decode(cut); }) == ErrorCode::kTruncated);
    auto nan_blob = bytes;
    const double nan = std::nan("");
    std::memcpy(nan_blob.data() + bytes.size() - 8, &nan, 8);
    CHECK(error_code_of([&] { MlpNoisePredictor::decode(nan_blob); }) == ErrorCode::kNonFinite);
    CHECK(error_code_of([] { MlpNoisePredictor::load("/nonexistent/p.bin"); }) == ErrorCode::kIoFailure);
  }

  TEST_CASE("parameter vector size and order") {
    MlpNoisePredictor model(10, 6, 4, 1);
    CHECK(model.parameter_count() == (6 * 14 + 6) + (6 * 6 + 6) + (10 * 6 + 10));
    auto p = model.parameters();
    p[0] = 42.0;
    model.set_parameters(p);
    CHECK(model.layers()[0].weight(0, 0) == 42.0);
    CHECK_THROWS_AS(model.set_parameters(std::vector<double>(3)), Error);
  }

  TEST_CASE("empty dataset is rejected") {
    const auto s = make_cosine_schedule(8);
    CHECK(error_code_of([&] { train_predictor({}, s, {}, 1); }) == ErrorCode::kEmptyDataset);
  }
}
