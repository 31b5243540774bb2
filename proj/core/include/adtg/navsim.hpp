#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "adtg/heightfield.hpp"
#include "adtg/rng.hpp"

namespace adtg {

struct NavConfig {
  double v_max = 1.0;      // m/s
  double omega_max = 1.5;  // rad/s
  double dt = 0.1;         // s
  /// d_max / dt / v_avg with d_max = 3.0 m and v_avg = 0.3 m/s.
  int max_steps = 100;
  double goal_tolerance = 0.25;  // m
  double tilt_limit = std::numbers::pi / 9.0;
  /// Tilt above this angle costs tilt_penalty per step.
  double tilt_warning = std::numbers::pi / 12.0;
  double gamma = 0.99;
  double goal_reward = 5.0;
  double tilt_penalty = 0.01;
  double smoothness_penalty = 0.01;
  double goal_distance_min = 0.5;
  double goal_distance_max = 3.0;
  /// Start and goal cells need slope below this fraction of tan(tilt_limit).
  double start_slope_fraction = 0.5;
  /// Initial heading is the goal bearing offset by up to this much.
  double heading_spread = std::numbers::pi / 3.0;

  void validate() const;
};

/// Heightmap plus cached gradients and the cells an episode may start on.
class Terrain {
 public:
  explicit Terrain(Heightmap map, const NavConfig& config = {});

  const Heightmap& map() const noexcept { return map_; }
  const NavConfig& config() const noexcept { return config_; }

  bool inside(double x, double y) const noexcept;
  /// Bilinear interpolation of the cell gradients at (x, y); clamps to the map.
  void gradient_at(double x, double y, double& gx, double& gy) const noexcept;
  double slope_at(double x, double y) const noexcept;
  double cell_slope(int row, int col) const noexcept;

  /// Interior cells with slope < start_slope_fraction * tan(tilt_limit), row-major.
  const std::vector<std::uint32_t>& start_cells() const noexcept { return start_cells_; }

 private:
  Heightmap map_;
  NavConfig config_;
  GradientField grad_;
  std::vector<std::uint32_t> start_cells_;
};

struct Action {
  double v = 0.0;
  double omega = 0.0;
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // wrapped to (-pi, pi]
  Action last_action;
};

struct Goal {
  double x = 0.0;
  double y = 0.0;
};

double wrap_angle(double a) noexcept;

enum class FailureReason { kNone, kTiltExceeded, kOutOfBounds, kTimeout };
const char* to_string(FailureReason reason) noexcept;

struct StepOutcome {
  RobotState state;
  double pitch = 0.0;
  double roll = 0.0;
  FailureReason termination = FailureReason::kNone;
};

/// Unicycle kinematics followed by the tilt and bounds checks. Throws
/// Error(kOutOfRange) if the action exceeds the configured limits.
StepOutcome step(const Terrain& terrain, const RobotState& state, Action action, double dt);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const Terrain& terrain, const RobotState& state, const Goal& goal) const = 0;
};

/// Turns toward the goal, slowing for large bearing errors. Ignores the terrain.
class GoalSeekingPolicy final : public Policy {
 public:
  explicit GoalSeekingPolicy(double speed = 0.8, double turn_gain = 2.0) : speed_(speed), gain_(turn_gain) {}
  Action act(const Terrain& terrain, const RobotState& state, const Goal& goal) const override;

 private:
  double speed_;
  double gain_;
};

struct EpisodeSpec {
  RobotState start;
  Goal goal;
  int max_steps = 100;
  double dt = 0.1;
};

struct EpisodeResult {
  bool success = false;
  int steps_used = 0;
  FailureReason failure_reason = FailureReason::kNone;
  double discounted_return = 0.0;
};

struct TraceRow {
  int t;
  double x, y, heading, v, omega, reward;
};

/// Runs one episode; deterministic given the policy and spec. When `trace`
/// is set, one row per step is appended.
EpisodeResult run_episode(const Terrain& terrain, const EpisodeSpec& spec, const Policy& policy,
                          std::vector<TraceRow>* trace = nullptr);

/// CSV with header `t,x,y,heading,v,omega,reward`.
void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path);

/// Start on a low-slope cell, goal on a low-slope point 0.5-3 m away.
/// Empty when the terrain has no start cells or no goal was found.
std::optional<EpisodeSpec> sample_episode(const Terrain& terrain, Rng& rng);

struct SuccessEvaluation {
  double success_rate = 0.0;
  double mean_return = 0.0;
  int episodes = 0;
  /// False when no episode could be placed; success_rate is then 0.
  bool valid = true;
};

/// Pair i uses stream (seed, "pair", i). Invariant to `jobs`.
SuccessEvaluation evaluate_policy(const Terrain& terrain, const Policy& policy, int n_pairs,
                                  std::uint64_t seed, int jobs = 1);

double success_rate(const Terrain& terrain, const Policy& policy, int n_pairs, std::uint64_t seed,
                    int jobs = 1);

inline constexpr double kOracleRoughnessMax = 0.6;

/// clamp(1 - roughness / rho_max, 0, 1).
double oracle_success(const Heightmap& map, double rho_max = kOracleRoughnessMax);
double oracle_success(const Heightmap& map, const std::function<double(double)>& difficulty_curve);

}  // namespace adtg
