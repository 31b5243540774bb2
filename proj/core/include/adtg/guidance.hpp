#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adtg/diffusion.hpp"
#include "adtg/rng.hpp"
#include "adtg/terrain_record.hpp"

namespace adtg {

/// Performance weighting w(s) = exp(-(s - target)^2 / temperature^2) and the
/// success-rate band used when picking synthesis sources.
struct WeightingParams {
  double target = 0.725;
  double temperature = 0.25;
  double band_lo = 0.6;
  double band_hi = 0.85;

  /// Throws Error(kInvalidConfig). A target outside the band is allowed.
  void validate() const;
  bool in_band(double s) const noexcept { return s >= band_lo && s <= band_hi; }
};

/// Log of the weight; exact even where the weight itself would underflow.
double log_weight(double success_rate, const WeightingParams& params);

/// Throws Error(kOutOfRange) if s is outside [0, 1]. The result is floored at
/// the smallest normal double so it stays strictly positive.
double weight(double success_rate, const WeightingParams& params);

struct SynthesisSource {
  std::uint64_t record_id = 0;
  double success_rate = 0.0;
  Latent latent;
};

struct SynthesisInput {
  int k = 0;
  std::vector<SynthesisSource> sources;
  std::vector<double> weights;

  /// 1 <= |sources| <= max_sources, weights positive and aligned, latents at k.
  void validate(std::size_t max_sources = 16) const;
};

/// Weighted latent interpolation sum_i w_i e_k^i / sum_i w_i.
Latent fuse_latents(const SynthesisInput& input);

/// Weighted mean of the sources' success rates.
double predicted_success(const SynthesisInput& input);

/// Self-normalized importance-sampling estimate sum_i exp(lw_i) x_i / sum_i exp(lw_i),
/// evaluated with a max shift so large log-weights do not overflow.
double self_normalized_mean(std::span<const double> samples, std::span<const double> log_weights);

struct SourceSelectionConfig {
  int initial_sources = 4;
  int max_sources = 16;
  std::size_t pool_cap = 1000;
};

/// Candidate pool: measured records, uniformly sub-sampled to pool_cap.
std::vector<std::size_t> candidate_pool(std::span<const TerrainRecord> dataset, std::size_t pool_cap,
                                        Rng& rng);

/// Picks synthesis sources (indices into `dataset`):
///  1. candidates = candidate_pool(dataset)
///  2. up to initial_sources distinct draws from out-of-band candidates, or
///     weight-proportional draws from all candidates if none are out of band
///  3. while the predicted success is outside the band and fewer than
///     max_sources are chosen, add the highest-weight unused candidate on the
///     correcting side of the prediction.
std::vector<std::size_t> select_synthesis_sources(std::span<const TerrainRecord> dataset,
                                                  const WeightingParams& params,
                                                  const SourceSelectionConfig& config, Rng& rng);

/// Same rules with a precomputed candidate pool (indices into `dataset`).
std::vector<std::size_t> select_synthesis_sources(std::span<const TerrainRecord> dataset,
                                                  std::span<const std::size_t> pool,
                                                  const WeightingParams& params,
                                                  const SourceSelectionConfig& config, Rng& rng);

struct SynthesisResult {
  Heightmap map;
  int k = 0;
  double predicted_success = 0.0;
  /// Sum of the raw source weights; small values mean every source was far from target.
  double weight_mass = 0.0;
  std::vector<std::uint64_t> source_ids;
};

/// Forward-diffuses the chosen records to step k, fuses the latents with their
/// performance weights and reverse-samples the fused latent back to a terrain.
SynthesisResult synthesize_from_sources(std::span<const TerrainRecord* const> sources, int k,
                                        const NoiseSchedule& schedule, const NoisePredictor& predictor,
                                        const WeightingParams& params, Rng& rng);

/// Source selection followed by synthesize_from_sources.
SynthesisResult synthesize(std::span<const TerrainRecord> dataset, int k, const NoiseSchedule& schedule,
                           const NoisePredictor& predictor, const WeightingParams& params,
                           const SourceSelectionConfig& selection, Rng& rng);
SynthesisResult synthesize(std::span<const TerrainRecord> dataset, std::span<const std::size_t> pool, int k,
                           const NoiseSchedule& schedule, const NoisePredictor& predictor,
                           const WeightingParams& params, const SourceSelectionConfig& selection, Rng& rng);

/// `count` independent syntheses; item j draws from stream (seed, "synthesize", j).
std::vector<SynthesisResult> synthesize_batch(std::span<const TerrainRecord> dataset, int count, int k,
                                              const NoiseSchedule& schedule,
                                              const NoisePredictor& predictor,
                                              const WeightingParams& params,
                                              const SourceSelectionConfig& selection,
                                              std::uint64_t seed, int jobs);

}  // namespace adtg
