#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "adtg/curriculum.hpp"
#include "adtg/diffusion.hpp"
#include "adtg/guidance.hpp"

namespace adtg {

double mean(std::span<const double> x);
/// Median; the mean of the two middle values for even sizes.
double median(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);
double mean_abs_error(std::span<const double> x, std::span<const double> y);

/// Predicted versus oracle-measured success of guided syntheses.
struct ConsistencyConfig {
  int syntheses = 60;
  /// Forward steps are drawn uniformly on [k_min, k_max]; k_max = 0 means K/2.
  int k_min = 1;
  int k_max = 0;
  int sources_min = 2;
  int sources_max = 4;
  /// Records sampled from the prior and measured with the oracle.
  int dataset_size = 64;
  double oracle_roughness_max = kOracleRoughnessMax;
};

struct ConsistencyRow {
  int trial = 0;
  int k = 0;
  int sources = 0;
  double predicted = 0.0;
  double actual = 0.0;
};

std::vector<ConsistencyRow> run_consistency(const GaussianMixturePrior& prior, const NoiseSchedule& schedule,
                                            const NoisePredictor& predictor, const WeightingParams& weighting,
                                            const ConsistencyConfig& config, std::uint64_t seed, int jobs = 1);

/// CSV with header `trial,k,sources,predicted_success,actual_success`.
void write_consistency_csv(std::span<const ConsistencyRow> rows, const std::filesystem::path& path);

/// Total per-cell variance of `samples` syntheses from the fixed `sources` at each k.
std::vector<double> synthesis_variance_by_step(std::span<const TerrainRecord* const> sources,
                                               std::span<const int> ks, int samples,
                                               const NoiseSchedule& schedule, const NoisePredictor& predictor,
                                               const WeightingParams& weighting, std::uint64_t seed, int jobs = 1);

/// Sum over cells of the population variance across maps.
double total_variance(std::span<const Heightmap> maps);

struct ModeOutcome {
  CurriculumMode mode;
  std::uint64_t seed;
  double final_heldout_success = 0.0;
  /// Epoch count at the first evaluation reaching the threshold, if any.
  std::optional<int> epochs_to_threshold;
};

struct EvalPoint {
  int epoch;  // epochs completed
  double heldout_success;
};

std::vector<EvalPoint> heldout_curve(std::span<const MetricsRow> rows);
std::optional<int> epochs_to_reach(std::span<const EvalPoint> curve, double threshold);

/// Runs every (mode, seed) pair; runs are sequential, each uses `jobs` workers.
std::vector<ModeOutcome> compare_modes(const CurriculumConfig& config, std::span<const CurriculumMode> modes,
                                       std::span<const std::uint64_t> seeds, double threshold, int jobs = 1);

}  // namespace adtg
