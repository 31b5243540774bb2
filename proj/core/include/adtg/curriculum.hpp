#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adtg/diffusion.hpp"
#include "adtg/guidance.hpp"
#include "adtg/learner.hpp"
#include "adtg/navsim.hpp"
#include "adtg/procgen.hpp"
#include "adtg/terrain_record.hpp"

namespace adtg {

enum class CurriculumMode { kAdtg, kPgc, kPg, kNat, kDtg };

const char* to_string(CurriculumMode mode) noexcept;
CurriculumMode parse_curriculum_mode(const std::string& name);

/// Frozen evaluation terrains: bump layouts whose amplitude is solved so the
/// roughness hits evenly spaced targets on [roughness_lo, roughness_hi].
struct HeldoutConfig {
  int size = 16;
  double roughness_lo = 0.05;
  double roughness_hi = 0.5;
  int bumps = 16;
  double noise = 0.003;
  int pairs = 32;
  std::uint64_t seed = 20240601;
};

struct HeldoutTerrain {
  std::uint64_t id;
  double target_roughness;
  Heightmap map;
};

/// Held-out ids start here so they never collide with dataset ids.
inline constexpr std::uint64_t kHeldoutIdBase = std::uint64_t{1} << 48;

std::vector<HeldoutTerrain> make_heldout_set(const HeldoutConfig& config, int width, int height,
                                             double resolution);

struct PlateauConfig {
  bool enabled = false;
  int window = 10;
  double min_improvement = 0.005;
};

struct CurriculumConfig {
  int width = 32;
  int height = 32;
  double resolution = 0.1875;
  int steps = 64;
  double schedule_offset = 0.008;
  WeightingParams weighting;
  SourceSelectionConfig selection;
  int pca_components = 8;
  int terrains_per_epoch = 4;
  int epochs = 150;
  int eval_every = 5;
  int initial_size = 16;
  int refresh_age = 5;
  int success_pairs = 64;
  HeldoutConfig heldout;
  BumpPriorConfig prior;
  NavConfig nav;
  TrainerConfig trainer;
  CurriculumMode mode = CurriculumMode::kAdtg;
  /// Replace rollouts by oracle_success and skip policy updates.
  bool oracle = false;
  double oracle_roughness_max = kOracleRoughnessMax;
  PlateauConfig plateau;
  /// Record elapsed milliseconds in the metrics; off keeps metrics byte-stable.
  bool record_wall_time = false;
  /// Empty selects the analytic mixture predictor of the prior.
  std::string predictor_path;

  void validate() const;
};

/// Procedural-curriculum generator state for one terrain family.
struct PgcFamily {
  ProcGenSpec spec;
  std::optional<std::uint64_t> last_record;
};

struct CurriculumState {
  std::vector<TerrainRecord> dataset;
  CemState policy;
  /// Completed epochs.
  int epoch = 0;
  std::uint64_t root_seed = 0;
  std::uint64_t next_id = 0;
  double reference_scale = 0.0;
  std::vector<double> lambda_history;
  std::vector<double> heldout_history;
  std::array<PgcFamily, kProcKindCount> pgc;
  bool stopped = false;
};

struct MetricsRow {
  int epoch = 0;
  std::string phase;
  std::optional<std::uint64_t> env_id;
  std::optional<double> success_rate;
  std::optional<double> lambda_var;
  std::optional<int> k;
  std::optional<double> heldout_return;
  std::optional<double> heldout_success;
  double wall_ms = 0.0;
};

std::string metrics_csv_header();
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);

/// Weighted draw with probability w_i / sum_j w_j over measured records.
std::size_t select_weighted(std::span<const TerrainRecord> dataset, const WeightingParams& params, Rng& rng);
/// Uniform draw over measured records.
std::size_t select_uniform(std::span<const TerrainRecord> dataset, Rng& rng);

/// Easiest setting of each family, in ProcKind order.
std::array<PgcFamily, kProcKindCount> initial_pgc_families();
/// Scales the family's primary difficulty parameter by 1.15 (success above
/// the band) or 0.85 (below), clamped to the family's limits.
ProcGenSpec adapt_pgc_spec(const ProcGenSpec& spec, double success_rate, const WeightingParams& params);

struct HeldoutResult {
  double normalized_return = 0.0;
  double success_rate = 0.0;
};

/// Mean over held-out terrains; normalized return divides by the goal reward.
HeldoutResult evaluate_heldout(std::span<const HeldoutTerrain> heldout, const PolicyParams& policy,
                               const CurriculumConfig& config, int jobs = 1);

class CurriculumRunner {
 public:
  CurriculumRunner(CurriculumConfig config, std::uint64_t seed, int jobs = 1);
  /// Resumes from a saved state.
  CurriculumRunner(CurriculumConfig config, CurriculumState state, int jobs = 1);

  const CurriculumConfig& config() const noexcept { return config_; }
  const CurriculumState& state() const noexcept { return state_; }
  const std::vector<HeldoutTerrain>& heldout() const noexcept { return heldout_; }
  const GaussianMixturePrior& prior() const noexcept { return prior_; }
  const NoiseSchedule& schedule() const noexcept { return schedule_; }

  bool finished() const noexcept;
  std::vector<MetricsRow> run_epoch();
  std::vector<MetricsRow> run();

 private:
  void setup();
  double measure(const TerrainRecord& record, int epoch) const;
  void refresh(int epoch);
  std::vector<TerrainRecord> generate(int epoch, std::vector<MetricsRow>& rows);

  CurriculumConfig config_;
  int jobs_;
  GaussianMixturePrior prior_;
  NoiseSchedule schedule_;
  std::unique_ptr<NoisePredictor> predictor_;
  std::vector<HeldoutTerrain> heldout_;
  CurriculumState state_;
};

struct CurriculumRun {
  CurriculumState state;
  std::vector<MetricsRow> metrics;
  std::vector<HeldoutTerrain> heldout;
};

CurriculumRun run_acrl(const CurriculumConfig& config, std::uint64_t seed, int jobs = 1);
CurriculumRun run_baseline(CurriculumConfig config, CurriculumMode kind, std::uint64_t seed, int jobs = 1);

/// Writes terrains/NNNN.ahf and a `state` manifest under `dir`.
void save_checkpoint(const CurriculumState& state, const std::filesystem::path& dir);
CurriculumState load_checkpoint(const std::filesystem::path& dir);

}  // namespace adtg
