#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "adtg/navsim.hpp"

namespace adtg {

inline constexpr int kFeatureCount = 9;
inline constexpr int kParamCount = 2 * kFeatureCount;
using FeatureVector = std::array<double, kFeatureCount>;

/// goal_distance, bearing_error, sin_bearing, cos_bearing, then slope probes
/// 0.3 m ahead at -60, -30, 0, 30 and 60 degrees off the heading.
const std::array<const char*, kFeatureCount>& feature_names();

inline constexpr double kProbeDistance = 0.3;
/// Probe value reported when the probe point falls outside the map.
inline constexpr double kProbeOutside = 1.0;

FeatureVector policy_features(const Terrain& terrain, const RobotState& state, const Goal& goal);

/// Row 0 drives v, row 1 drives omega; weights[row * kFeatureCount + feature].
struct PolicyParams {
  std::array<double, kParamCount> weights{};

  double& at(int row, int feature) { return weights[static_cast<std::size_t>(row * kFeatureCount + feature)]; }
  double at(int row, int feature) const { return weights[static_cast<std::size_t>(row * kFeatureCount + feature)]; }
  bool operator==(const PolicyParams&) const = default;
};

/// Linear map of the features, v clamped to [0, v_max], omega to +-omega_max.
Action act(const PolicyParams& params, const Terrain& terrain, const RobotState& state, const Goal& goal);

class LinearPolicy final : public Policy {
 public:
  explicit LinearPolicy(PolicyParams params = {}) : params_(params) {}
  Action act(const Terrain& terrain, const RobotState& state, const Goal& goal) const override;
  const PolicyParams& params() const noexcept { return params_; }

 private:
  PolicyParams params_;
};

struct TrainerConfig {
  int population = 32;
  int elite = 8;
  int eval_pairs = 32;
  double initial_scale = 0.5;
  double scale_decay = 0.97;
  double scale_floor = 0.02;

  void validate() const;
  /// max(scale_floor, initial_scale * scale_decay^iteration).
  double scale(int iteration) const;
};

struct CemState {
  PolicyParams mean;
  std::array<double, kParamCount> sigma{};
  int iteration = 0;

  static CemState initial(const TrainerConfig& config, const PolicyParams& mean = {});
};

struct CemStats {
  double population_mean_return = 0.0;
  double elite_mean_return = 0.0;
  double best_return = 0.0;
  /// False when the terrain offered no episodes and the state was left unchanged.
  bool updated = true;
};

struct CemResult {
  CemState state;
  CemStats stats;
};

/// One cross-entropy iteration on `terrain`. Candidate i perturbs the mean with
/// stream (seed, "cem_perturb", i); every candidate is scored on the same
/// episodes (stream root (seed, "cem_pairs")). The new mean is the elite mean
/// and sigma_j = max(scale(iteration + 1), elite std_j).
CemResult optimize_step(const CemState& state, const Terrain& terrain, const TrainerConfig& config,
                        std::uint64_t seed, int jobs = 1);

std::string encode_policy_csv(const PolicyParams& params);
PolicyParams decode_policy_csv(const std::string& text);
void write_policy_csv(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams read_policy_csv(const std::filesystem::path& path);

}  // namespace adtg
