#include "adtg/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "adtg/error.hpp"
#include "adtg/parallel.hpp"

namespace adtg {

const char* to_string(TerrainOrigin origin) noexcept {
  switch (origin) {
    case TerrainOrigin::kSeed: return "seed";
    case TerrainOrigin::kSynthesized: return "synthesized";
    case TerrainOrigin::kProcedural: return "procedural";
  }
  return "?";
}

TerrainOrigin parse_terrain_origin(const std::string& name) {
  for (auto o : {TerrainOrigin::kSeed, TerrainOrigin::kSynthesized, TerrainOrigin::kProcedural}) {
    if (name == to_string(o)) return o;
  }
  fail(ErrorCode::kInvalidArgument, "unknown terrain origin '" + name + "'");
}

void WeightingParams::validate() const {
  if (!(target > 0.0 && target < 1.0)) fail(ErrorCode::kInvalidConfig, "weighting target must lie in (0, 1)");
  if (!(temperature > 0.0)) fail(ErrorCode::kInvalidConfig, "weighting temperature must be positive");
  if (!(band_lo > 0.0 && band_lo < band_hi && band_hi < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "weighting band must satisfy 0 < lo < hi < 1");
  }
}

double log_weight(double success_rate, const WeightingParams& params) {
  if (!(success_rate >= 0.0 && success_rate <= 1.0)) {
    fail(ErrorCode::kOutOfRange, "success rate must lie in [0, 1]");
  }
  const double d = (success_rate - params.target) / params.temperature;
  return -d * d;
}

double weight(double success_rate, const WeightingParams& params) {
  return std::max(std::exp(log_weight(success_rate, params)), std::numeric_limits<double>::min());
}

void SynthesisInput::validate(std::size_t max_sources) const {
  if (sources.empty()) fail(ErrorCode::kEmptyDataset, "synthesis input has no sources");
  require(sources.size() <= max_sources, ErrorCode::kInvalidArgument, "too many synthesis sources");
  require(weights.size() == sources.size(), ErrorCode::kDimensionMismatch,
          "weights and sources differ in length");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    require(weights[i] > 0.0 && std::isfinite(weights[i]), ErrorCode::kInvalidArgument,
            "synthesis weights must be positive");
    require(sources[i].latent.step == k, ErrorCode::kInvalidArgument, "source latent not at step k");
    require(sources[i].latent.same_shape(sources.front().latent), ErrorCode::kDimensionMismatch,
            "source latents differ in shape");
  }
}

Latent fuse_latents(const SynthesisInput& input) {
  if (input.sources.empty()) fail(ErrorCode::kEmptyDataset, "cannot fuse zero latents");
  require(input.weights.size() == input.sources.size(), ErrorCode::kDimensionMismatch,
          "weights and sources differ in length");
  const double total = std::accumulate(input.weights.begin(), input.weights.end(), 0.0);
  require(total > 0.0, ErrorCode::kInvalidArgument, "fusion weights sum to zero");
  Latent out = input.sources.front().latent;
  out.step = input.k;
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (std::size_t s = 0; s < input.sources.size(); ++s) {
    const auto& v = input.sources[s].latent.values;
    require(v.size() == out.values.size(), ErrorCode::kDimensionMismatch, "latent sizes differ");
    require(input.sources[s].latent.step == input.k, ErrorCode::kInvalidArgument, "source latent not at step k");
    for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += input.weights[s] * v[i];
  }
  for (auto& v : out.values) v /= total;
  return out;
}

double predicted_success(const SynthesisInput& input) {
  if (input.sources.empty()) fail(ErrorCode::kEmptyDataset, "no sources to predict from");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < input.sources.size(); ++i) {
    num += input.weights[i] * input.sources[i].success_rate;
    den += input.weights[i];
  }
  return num / den;
}

double self_normalized_mean(std::span<const double> samples, std::span<const double> log_weights) {
  require(!samples.empty() && samples.size() == log_weights.size(), ErrorCode::kInvalidArgument,
          "importance sampling needs matching, nonempty samples and weights");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = std::exp(log_weights[i] - top);
    num += w * samples[i];
    den += w;
  }
  return num / den;
}

std::vector<std::size_t> candidate_pool(std::span<const TerrainRecord> dataset, std::size_t pool_cap,
                                        Rng& rng) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].measured()) pool.push_back(i);
  }
  if (pool.size() > pool_cap) {
    // Partial Fisher-Yates, then restore dataset order for determinism downstream.
    for (std::size_t i = 0; i < pool_cap; ++i) {
      const auto j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(pool_cap);
    std::sort(pool.begin(), pool.end());
  }
  return pool;
}

namespace {

double prediction_of(std::span<const TerrainRecord> dataset, const std::vector<std::size_t>& chosen,
                     const WeightingParams& params) {
  double num = 0.0;
  double den = 0.0;
  for (auto i : chosen) {
    const double s = *dataset[i].success_rate;
    const double w = weight(s, params);
    num += w * s;
    den += w;
  }
  return num / den;
}

std::size_t weighted_draw(std::span<const double> weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

std::vector<std::size_t> select_synthesis_sources(std::span<const TerrainRecord> dataset,
                                                  const WeightingParams& params,
                                                  const SourceSelectionConfig& config, Rng& rng) {
  if (dataset.empty()) fail(ErrorCode::kEmptyDataset, "cannot select sources from an empty dataset");
  const auto pool = candidate_pool(dataset, config.pool_cap, rng);
  return select_synthesis_sources(dataset, pool, params, config, rng);
}

std::vector<std::size_t> select_synthesis_sources(std::span<const TerrainRecord> dataset,
                                                  std::span<const std::size_t> pool,
                                                  const WeightingParams& params,
                                                  const SourceSelectionConfig& config, Rng& rng) {
  require(config.initial_sources >= 1 && config.max_sources >= config.initial_sources,
          ErrorCode::kInvalidConfig, "need 1 <= initial_sources <= max_sources");
  if (pool.empty()) fail(ErrorCode::kEmptyDataset, "no measured records to synthesize from");
  for (auto i : pool) {
    require(i < dataset.size() && dataset[i].measured(), ErrorCode::kInvalidArgument,
            "candidate pool must index measured records");
  }

  std::vector<std::size_t> out_of_band;
  for (auto i : pool) {
    if (!params.in_band(*dataset[i].success_rate)) out_of_band.push_back(i);
  }

  const auto want = static_cast<std::size_t>(config.initial_sources);
  std::vector<std::size_t> chosen;
  if (!out_of_band.empty()) {
    auto candidates = out_of_band;
    const auto n = std::min(want, candidates.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + rng.uniform_index(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      chosen.push_back(candidates[i]);
    }
  } else {
    std::vector<double> w;
    w.reserve(pool.size());
    for (auto i : pool) w.push_back(weight(*dataset[i].success_rate, params));
    std::vector<std::size_t> remaining(pool.begin(), pool.end());
    const auto n = std::min(want, remaining.size());
    for (std::size_t t = 0; t < n; ++t) {
      const auto pick = weighted_draw(w, rng);
      chosen.push_back(remaining[pick]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }

  // Greedy correction toward the band, highest weight first, ties by index.
  std::vector<std::size_t> order(pool.begin(), pool.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return weight(*dataset[a].success_rate, params) > weight(*dataset[b].success_rate, params);
  });
  while (chosen.size() < static_cast<std::size_t>(config.max_sources)) {
    const double pred = prediction_of(dataset, chosen, params);
    if (params.in_band(pred)) break;
    const bool need_higher = pred < params.band_lo;
    std::optional<std::size_t> next;
    for (auto i : order) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      const double s = *dataset[i].success_rate;
      if (need_higher ? s > pred : s < pred) {
        next = i;
        break;
      }
    }
    if (!next) break;
    chosen.push_back(*next);
  }
  return chosen;
}

SynthesisResult synthesize_from_sources(std::span<const TerrainRecord* const> sources, int k,
                                        const NoiseSchedule& schedule, const NoisePredictor& predictor,
                                        const WeightingParams& params, Rng& rng) {
  if (sources.empty()) fail(ErrorCode::kEmptyDataset, "no synthesis sources");
  if (k < 1 || k > schedule.steps()) {
    fail(ErrorCode::kOutOfRange, "synthesis step " + std::to_string(k) + " outside [1, K]");
  }
  SynthesisInput input;
  input.k = k;
  std::vector<double> log_w;
  for (const auto* rec : sources) {
    require(rec->measured(), ErrorCode::kInvalidArgument, "synthesis source lacks a success rate");
    input.sources.push_back({rec->id, *rec->success_rate, forward_diffuse(rec->map, k, schedule, rng)});
    log_w.push_back(log_weight(*rec->success_rate, params));
  }
  // Fusion is invariant to a common weight scale; shifting by the max log
  // weight keeps the weights representable however far the sources sit.
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double mass = 0.0;
  for (double lw : log_w) {
    input.weights.push_back(std::exp(lw - top));
    mass += std::exp(lw);
  }
  const Latent fused = fuse_latents(input);
  SynthesisResult result{reverse_sample(fused, predictor, schedule, rng), k, predicted_success(input), mass, {}};
  for (const auto& s : input.sources) result.source_ids.push_back(s.record_id);
  return result;
}

SynthesisResult synthesize(std::span<const TerrainRecord> dataset, int k, const NoiseSchedule& schedule,
                           const NoisePredictor& predictor, const WeightingParams& params,
                           const SourceSelectionConfig& selection, Rng& rng) {
  if (dataset.empty()) fail(ErrorCode::kEmptyDataset, "cannot synthesize from an empty dataset");
  const auto pool = candidate_pool(dataset, selection.pool_cap, rng);
  return synthesize(dataset, pool, k, schedule, predictor, params, selection, rng);
}

SynthesisResult synthesize(std::span<const TerrainRecord> dataset, std::span<const std::size_t> pool, int k,
                           const NoiseSchedule& schedule, const NoisePredictor& predictor,
                           const WeightingParams& params, const SourceSelectionConfig& selection, Rng& rng) {
  const auto picked = select_synthesis_sources(dataset, pool, params, selection, rng);
  std::vector<const TerrainRecord*> sources;
  for (auto i : picked) sources.push_back(&dataset[i]);
  return synthesize_from_sources(sources, k, schedule, predictor, params, rng);
}

std::vector<SynthesisResult> synthesize_batch(std::span<const TerrainRecord> dataset, int count, int k,
                                              const NoiseSchedule& schedule,
                                              const NoisePredictor& predictor,
                                              const WeightingParams& params,
                                              const SourceSelectionConfig& selection,
                                              std::uint64_t seed, int jobs) {
  std::vector<std::optional<SynthesisResult>> slots(static_cast<std::size_t>(std::max(count, 0)));
  parallel_for(slots.size(), jobs, [&](std::size_t j) {
    Rng rng(derive_seed(seed, "synthesize", j));
    slots[j] = synthesize(dataset, k, schedule, predictor, params, selection, rng);
  });
  std::vector<SynthesisResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace adtg
