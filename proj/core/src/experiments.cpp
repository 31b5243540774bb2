#include "adtg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "adtg/error.hpp"
#include "adtg/navsim.hpp"
#include "adtg/parallel.hpp"

namespace adtg {

double mean(std::span<const double> x) {
  require(!x.empty(), ErrorCode::kEmptyDataset, "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  require(!x.empty(), ErrorCode::kEmptyDataset, "median of an empty sample");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::kInvalidArgument,
          "correlation needs two equal-length samples of size >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double mean_abs_error(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && !x.empty(), ErrorCode::kInvalidArgument, "samples differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
  return total / static_cast<double>(x.size());
}

std::vector<ConsistencyRow> run_consistency(const GaussianMixturePrior& prior, const NoiseSchedule& schedule,
                                            const NoisePredictor& predictor, const WeightingParams& weighting,
                                            const ConsistencyConfig& config, std::uint64_t seed, int jobs) {
  const int k_max = config.k_max > 0 ? config.k_max : schedule.steps() / 2;
  require(config.syntheses >= 1 && config.dataset_size >= 1, ErrorCode::kInvalidConfig,
          "consistency needs syntheses >= 1 and dataset_size >= 1");
  require(config.k_min >= 1 && config.k_min <= k_max && k_max <= schedule.steps(), ErrorCode::kInvalidConfig,
          "consistency needs 1 <= k_min <= k_max <= K");
  require(config.sources_min >= 1 && config.sources_max >= config.sources_min && config.sources_max <= 16,
          ErrorCode::kInvalidConfig, "consistency needs 1 <= sources_min <= sources_max <= 16");

  std::vector<TerrainRecord> dataset;
  for (int i = 0; i < config.dataset_size; ++i) {
    Rng rng(derive_seed(seed, "consistency_data", static_cast<std::uint64_t>(i)));
    Heightmap map = sample_prior(prior, rng);
    const double s = oracle_success(map, config.oracle_roughness_max);
    dataset.push_back({static_cast<std::uint64_t>(i), std::move(map), s, 0, TerrainOrigin::kSeed});
  }
  const auto want = static_cast<std::size_t>(std::min(config.sources_max, config.dataset_size));
  std::vector<ConsistencyRow> rows(static_cast<std::size_t>(config.syntheses));
  parallel_for(rows.size(), jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, "consistency_trial", t));
    const int k = config.k_min + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k_max - config.k_min + 1)));
    const auto lo = static_cast<std::size_t>(config.sources_min);
    const std::size_t count = std::min(want, lo + rng.uniform_index(want >= lo ? want - lo + 1 : 1));
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<const TerrainRecord*> sources;
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + rng.uniform_index(idx.size() - i);
      std::swap(idx[i], idx[j]);
      sources.push_back(&dataset[idx[i]]);
    }
    const auto result = synthesize_from_sources(sources, k, schedule, predictor, weighting, rng);
    rows[t] = {static_cast<int>(t), k, static_cast<int>(count), result.predicted_success,
               oracle_success(result.map, config.oracle_roughness_max)};
  });
  return rows;
}

void write_consistency_csv(std::span<const ConsistencyRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out << "trial,k,sources,predicted_success,actual_success\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%d,%d,%d,%.17g,%.17g\n", r.trial, r.k, r.sources, r.predicted, r.actual);
    out << line;
  }
  if (!out) fail(ErrorCode::kIoFailure, "failed writing " + path.string());
}

double total_variance(std::span<const Heightmap> maps) {
  require(maps.size() >= 2, ErrorCode::kEmptyDataset, "variance needs at least 2 maps");
  const std::size_t d = maps.front().size();
  double total = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (const auto& map : maps) m += map.data()[c];
    m /= static_cast<double>(maps.size());
    double v = 0.0;
    for (const auto& map : maps) v += (map.data()[c] - m) * (map.data()[c] - m);
    total += v / static_cast<double>(maps.size());
  }
  return total;
}

std::vector<double> synthesis_variance_by_step(std::span<const TerrainRecord* const> sources,
                                               std::span<const int> ks, int samples,
                                               const NoiseSchedule& schedule, const NoisePredictor& predictor,
                                               const WeightingParams& weighting, std::uint64_t seed, int jobs) {
  require(samples >= 2, ErrorCode::kInvalidArgument, "need at least 2 samples per step");
  std::vector<double> out;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    std::vector<std::optional<Heightmap>> maps(static_cast<std::size_t>(samples));
    parallel_for(maps.size(), jobs, [&](std::size_t s) {
      Rng rng(derive_seed(seed, "variance_by_step", static_cast<std::uint64_t>(ks[ki]), s));
      maps[s] = synthesize_from_sources(sources, ks[ki], schedule, predictor, weighting, rng).map;
    });
    std::vector<Heightmap> flat;
    for (auto& m : maps) flat.push_back(std::move(*m));
    out.push_back(total_variance(flat));
  }
  return out;
}

std::vector<EvalPoint> heldout_curve(std::span<const MetricsRow> rows) {
  std::vector<EvalPoint> out;
  for (const auto& r : rows) {
    if (r.phase == "eval" && r.heldout_success) out.push_back({r.epoch + 1, *r.heldout_success});
  }
  return out;
}

std::optional<int> epochs_to_reach(std::span<const EvalPoint> curve, double threshold) {
  for (const auto& p : curve) {
    if (p.heldout_success >= threshold) return p.epoch;
  }
  return std::nullopt;
}

std::vector<ModeOutcome> compare_modes(const CurriculumConfig& config, std::span<const CurriculumMode> modes,
                                       std::span<const std::uint64_t> seeds, double threshold, int jobs) {
  std::vector<ModeOutcome> out;
  for (auto mode : modes) {
    for (auto seed : seeds) {
      const auto run = run_baseline(config, mode, seed, jobs);
      const auto curve = heldout_curve(run.metrics);
      ModeOutcome o{mode, seed, curve.empty() ? 0.0 : curve.back().heldout_success, epochs_to_reach(curve, threshold)};
      out.push_back(o);
    }
  }
  return out;
}

}  // namespace adtg
