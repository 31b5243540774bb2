#pragma once

#include <cstdint>
#include <vector>

#include "adtg/heightfield.hpp"
#include "adtg/procgen.hpp"
#include "adtg/rng.hpp"

namespace adtg {

/// Per-step variance schedule for a K-step forward process. Index k runs over
/// [1, K] for beta/alpha and over [0, K] for alpha_bar.
class NoiseSchedule {
 public:
  /// Builds a schedule from betas; betas[0] is beta_1.
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const noexcept { return static_cast<int>(beta_.size()) - 1; }
  double beta(int k) const { return beta_.at(static_cast<std::size_t>(k)); }
  double alpha(int k) const { return 1.0 - beta(k); }
  double alpha_bar(int k) const { return alpha_bar_.at(static_cast<std::size_t>(k)); }

 private:
  std::vector<double> beta_;       // beta_[0] unused
  std::vector<double> alpha_bar_;  // alpha_bar_[0] == 1
};

/// Cosine schedule: alpha_bar(k) = f(k) / f(0), f(k) = cos^2(((k/K + s)/(1 + s)) pi/2),
/// betas clipped to [1e-6, 0.999] and alpha_bar recomputed as the running
/// product of the clipped alphas.
NoiseSchedule make_cosine_schedule(int steps, double offset = 0.008);

/// Diffusion latent e_k with the geometry of the map it came from.
struct Latent {
  int step = 0;
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  std::vector<double> values;

  static Latent from_map(const Heightmap& map, int step = 0);
  Heightmap to_map() const;
  bool same_shape(const Latent& other) const noexcept {
    return width == other.width && height == other.height;
  }
};

/// epsilon(e_k, k): predicts the noise component of a latent.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual std::vector<double> predict(const Latent& latent, const NoiseSchedule& schedule) const = 0;
};

/// e_k = sqrt(alpha_bar_k) e_0 + sqrt(1 - alpha_bar_k) eps. k == 0 returns e_0
/// unchanged. Throws Error(kOutOfRange) for k outside [0, K].
Latent forward_diffuse(const Heightmap& map, int k, const NoiseSchedule& schedule, Rng& rng);
Latent forward_diffuse(const Heightmap& map, int k, const NoiseSchedule& schedule, std::uint64_t seed);

/// Ancestral DDPM sampling from start.step down to 0 with reverse variance
/// beta_k; no noise is added on the final (k = 1) update.
Heightmap reverse_sample(const Latent& start, const NoisePredictor& predictor,
                         const NoiseSchedule& schedule, Rng& rng);
Heightmap reverse_sample(const Latent& start, const NoisePredictor& predictor,
                         const NoiseSchedule& schedule, std::uint64_t seed);

/// Pure-noise latent at step K (the usual DDPM starting point).
Latent pure_noise_latent(int width, int height, double resolution, const NoiseSchedule& schedule,
                         Rng& rng);

/// Exact noise prediction for a Gaussian-mixture data distribution. The
/// diffused marginal is q(e_k) = sum_j w_j N(sqrt(ab) mu_j, (ab s_j^2 + 1 - ab) I)
/// and the prediction is -sqrt(1 - ab) grad log q(e_k).
class AnalyticMixturePredictor final : public NoisePredictor {
 public:
  explicit AnalyticMixturePredictor(GaussianMixturePrior prior);

  std::vector<double> predict(const Latent& latent, const NoiseSchedule& schedule) const override;

  /// Posterior component probabilities given e_k (log-sum-exp normalized).
  std::vector<double> responsibilities(const Latent& latent, const NoiseSchedule& schedule) const;

  const GaussianMixturePrior& prior() const noexcept { return prior_; }

 private:
  GaussianMixturePrior prior_;
};

}  // namespace adtg
