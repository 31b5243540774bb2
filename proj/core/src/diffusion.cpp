#include "adtg/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "adtg/error.hpp"

namespace adtg {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) {
  require(betas.size() >= 2, ErrorCode::kInvalidArgument, "schedule needs at least 2 steps");
  beta_.reserve(betas.size() + 1);
  beta_.push_back(0.0);
  alpha_bar_.reserve(betas.size() + 1);
  alpha_bar_.push_back(1.0);
  for (double b : betas) {
    require(b > 0.0 && b < 1.0, ErrorCode::kInvalidArgument, "betas must lie in (0, 1)");
    beta_.push_back(b);
    alpha_bar_.push_back(alpha_bar_.back() * (1.0 - b));
  }
}

NoiseSchedule make_cosine_schedule(int steps, double offset) {
  require(steps >= 2, ErrorCode::kInvalidArgument, "cosine schedule needs K >= 2");
  auto f = [&](int k) {
    const double t = (static_cast<double>(k) / steps + offset) / (1.0 + offset);
    const double c = std::cos(t * std::numbers::pi / 2.0);
    return c * c;
  };
  const double f0 = f(0);
  std::vector<double> betas(static_cast<std::size_t>(steps));
  double prev = 1.0;
  for (int k = 1; k <= steps; ++k) {
    const double ab = f(k) / f0;
    betas[static_cast<std::size_t>(k - 1)] = std::clamp(1.0 - ab / prev, 1e-6, 0.999);
    prev = ab;
  }
  return NoiseSchedule(std::move(betas));
}

Latent Latent::from_map(const Heightmap& map, int step) {
  return {step, map.width(), map.height(), map.resolution(),
          std::vector<double>(map.data().begin(), map.data().end())};
}

Heightmap Latent::to_map() const { return Heightmap(width, height, resolution, values); }

Latent forward_diffuse(const Heightmap& map, int k, const NoiseSchedule& schedule, Rng& rng) {
  if (k < 0 || k > schedule.steps()) {
    fail(ErrorCode::kOutOfRange, "forward step " + std::to_string(k) + " outside [0, " +
                                     std::to_string(schedule.steps()) + "]");
  }
  Latent out = Latent::from_map(map, k);
  if (k == 0) return out;
  const double a = std::sqrt(schedule.alpha_bar(k));
  const double s = std::sqrt(1.0 - schedule.alpha_bar(k));
  for (auto& v : out.values) v = a * v + s * rng.normal();
  return out;
}

Latent forward_diffuse(const Heightmap& map, int k, const NoiseSchedule& schedule, std::uint64_t seed) {
  Rng rng(seed);
  return forward_diffuse(map, k, schedule, rng);
}

Heightmap reverse_sample(const Latent& start, const NoisePredictor& predictor,
                         const NoiseSchedule& schedule, Rng& rng) {
  if (start.step < 1 || start.step > schedule.steps()) {
    fail(ErrorCode::kOutOfRange, "reverse start step " + std::to_string(start.step) + " outside [1, " +
                                     std::to_string(schedule.steps()) + "]");
  }
  Latent e = start;
  for (int k = start.step; k >= 1; --k) {
    e.step = k;
    const auto eps = predictor.predict(e, schedule);
    require(eps.size() == e.values.size(), ErrorCode::kDimensionMismatch,
            "predictor output size differs from latent size");
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(k));
    const double coef = schedule.beta(k) / std::sqrt(1.0 - schedule.alpha_bar(k));
    const double sigma = k > 1 ? std::sqrt(schedule.beta(k)) : 0.0;
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      double v = inv_sqrt_alpha * (e.values[i] - coef * eps[i]);
      if (k > 1) v += sigma * rng.normal();
      e.values[i] = v;
    }
  }
  e.step = 0;
  return e.to_map();
}

Heightmap reverse_sample(const Latent& start, const NoisePredictor& predictor,
                         const NoiseSchedule& schedule, std::uint64_t seed) {
  Rng rng(seed);
  return reverse_sample(start, predictor, schedule, rng);
}

Latent pure_noise_latent(int width, int height, double resolution, const NoiseSchedule& schedule,
                         Rng& rng) {
  Latent e{schedule.steps(), width, height, resolution,
           std::vector<double>(static_cast<std::size_t>(width) * height)};
  for (auto& v : e.values) v = rng.normal();
  return e;
}

AnalyticMixturePredictor::AnalyticMixturePredictor(GaussianMixturePrior prior)
    : prior_(std::move(prior)) {}

std::vector<double> AnalyticMixturePredictor::responsibilities(const Latent& latent,
                                                               const NoiseSchedule& schedule) const {
  require(latent.width == prior_.width() && latent.height == prior_.height(),
          ErrorCode::kDimensionMismatch, "latent shape differs from prior shape");
  const double ab = schedule.alpha_bar(latent.step);
  const double sa = std::sqrt(ab);
  const double dim = static_cast<double>(latent.values.size());
  const auto& comps = prior_.components();
  std::vector<double> logp(comps.size());
  for (std::size_t j = 0; j < comps.size(); ++j) {
    const double var = ab * comps[j].sigma0 * comps[j].sigma0 + (1.0 - ab);
    const auto mu = comps[j].mean.data();
    double sq = 0.0;
    for (std::size_t i = 0; i < latent.values.size(); ++i) {
      const double d = latent.values[i] - sa * mu[i];
      sq += d * d;
    }
    logp[j] = std::log(comps[j].weight) - 0.5 * sq / var - 0.5 * dim * std::log(var);
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (auto& v : logp) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : logp) v /= total;
  return logp;
}

std::vector<double> AnalyticMixturePredictor::predict(const Latent& latent,
                                                      const NoiseSchedule& schedule) const {
  const auto resp = responsibilities(latent, schedule);
  const double ab = schedule.alpha_bar(latent.step);
  const double sa = std::sqrt(ab);
  const double scale = std::sqrt(1.0 - ab);
  const auto& comps = prior_.components();
  std::vector<double> eps(latent.values.size(), 0.0);
  for (std::size_t j = 0; j < comps.size(); ++j) {
    if (resp[j] < 1e-300) continue;
    const double var = ab * comps[j].sigma0 * comps[j].sigma0 + (1.0 - ab);
    const double c = scale * resp[j] / var;
    const auto mu = comps[j].mean.data();
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += c * (latent.values[i] - sa * mu[i]);
  }
  return eps;
}

}  // namespace adtg
