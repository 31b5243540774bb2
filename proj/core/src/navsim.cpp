#include "adtg/navsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "adtg/error.hpp"
#include "adtg/parallel.hpp"

namespace adtg {

void NavConfig::validate() const {
  const bool ok = v_max > 0 && omega_max > 0 && dt > 0 && max_steps >= 1 && goal_tolerance > 0 &&
                  tilt_limit > 0 && tilt_limit < std::numbers::pi / 2 && tilt_warning > 0 && gamma > 0 &&
                  gamma <= 1 && goal_distance_min > 0 && goal_distance_max >= goal_distance_min &&
                  start_slope_fraction > 0 && heading_spread >= 0;
  if (!ok) fail(ErrorCode::kInvalidConfig, "invalid navigation config");
}

Terrain::Terrain(Heightmap map, const NavConfig& config)
    : map_(std::move(map)), config_(config), grad_(compute_gradients(map_)) {
  config_.validate();
  const double limit = config_.start_slope_fraction * std::tan(config_.tilt_limit);
  for (int r = 1; r + 1 < map_.height(); ++r) {
    for (int c = 1; c + 1 < map_.width(); ++c) {
      if (cell_slope(r, c) < limit) start_cells_.push_back(static_cast<std::uint32_t>(r * map_.width() + c));
    }
  }
}

bool Terrain::inside(double x, double y) const noexcept {
  return x >= 0.0 && y >= 0.0 && x <= map_.extent_x() && y <= map_.extent_y();
}

double Terrain::cell_slope(int row, int col) const noexcept {
  const auto i = static_cast<std::size_t>(row) * map_.width() + col;
  return std::hypot(grad_.gx[i], grad_.gy[i]);
}

void Terrain::gradient_at(double x, double y, double& gx, double& gy) const noexcept {
  const int w = map_.width();
  const int h = map_.height();
  const double fx = std::clamp(x / map_.resolution(), 0.0, static_cast<double>(w - 1));
  const double fy = std::clamp(y / map_.resolution(), 0.0, static_cast<double>(h - 1));
  const int c0 = std::min(static_cast<int>(fx), w - 2);
  const int r0 = std::min(static_cast<int>(fy), h - 2);
  const double tx = fx - c0;
  const double ty = fy - r0;
  const auto i00 = static_cast<std::size_t>(r0) * w + c0;
  const auto i10 = i00 + static_cast<std::size_t>(w);
  auto lerp2 = [&](const std::vector<double>& g) {
    const double top = g[i00] * (1 - tx) + g[i00 + 1] * tx;
    const double bottom = g[i10] * (1 - tx) + g[i10 + 1] * tx;
    return top * (1 - ty) + bottom * ty;
  };
  gx = lerp2(grad_.gx);
  gy = lerp2(grad_.gy);
}

double Terrain::slope_at(double x, double y) const noexcept {
  double gx = 0.0;
  double gy = 0.0;
  gradient_at(x, y, gx, gy);
  return std::hypot(gx, gy);
}

double wrap_angle(double a) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

const char* to_string(FailureReason reason) noexcept {
  switch (reason) {
    case FailureReason::kNone: return "none";
    case FailureReason::kTiltExceeded: return "tilt_exceeded";
    case FailureReason::kOutOfBounds: return "out_of_bounds";
    case FailureReason::kTimeout: return "timeout";
  }
  return "?";
}

StepOutcome step(const Terrain& terrain, const RobotState& state, Action action, double dt) {
  const auto& cfg = terrain.config();
  constexpr double slack = 1e-12;
  if (!(std::abs(action.v) <= cfg.v_max + slack) || !(std::abs(action.omega) <= cfg.omega_max + slack)) {
    fail(ErrorCode::kOutOfRange, "action exceeds limits");
  }
  StepOutcome out;
  out.state.x = state.x + action.v * std::cos(state.heading) * dt;
  out.state.y = state.y + action.v * std::sin(state.heading) * dt;
  out.state.heading = wrap_angle(state.heading + action.omega * dt);
  out.state.last_action = action;
  if (!terrain.inside(out.state.x, out.state.y)) {
    out.termination = FailureReason::kOutOfBounds;
    return out;
  }
  double gx = 0.0;
  double gy = 0.0;
  terrain.gradient_at(out.state.x, out.state.y, gx, gy);
  const double c = std::cos(out.state.heading);
  const double s = std::sin(out.state.heading);
  out.pitch = std::atan(gx * c + gy * s);
  out.roll = std::atan(-gx * s + gy * c);
  if (std::max(std::abs(out.pitch), std::abs(out.roll)) > cfg.tilt_limit) {
    out.termination = FailureReason::kTiltExceeded;
  }
  return out;
}

Action GoalSeekingPolicy::act(const Terrain& terrain, const RobotState& state, const Goal& goal) const {
  const auto& cfg = terrain.config();
  const double err = wrap_angle(std::atan2(goal.y - state.y, goal.x - state.x) - state.heading);
  Action a;
  a.omega = std::clamp(gain_ * err, -cfg.omega_max, cfg.omega_max);
  a.v = std::clamp(speed_ * std::max(0.0, std::cos(err)), 0.0, cfg.v_max);
  return a;
}

EpisodeResult run_episode(const Terrain& terrain, const EpisodeSpec& spec, const Policy& policy,
                          std::vector<TraceRow>* trace) {
  const auto& cfg = terrain.config();
  EpisodeResult result;
  RobotState state = spec.start;
  double discount = 1.0;
  for (int t = 0; t < spec.max_steps; ++t) {
    const Action a = policy.act(terrain, state, spec.goal);
    const StepOutcome next = step(terrain, state, a, spec.dt);
    double reward = -cfg.smoothness_penalty *
                    std::hypot(a.v - state.last_action.v, a.omega - state.last_action.omega);
    if (std::max(std::abs(next.pitch), std::abs(next.roll)) > cfg.tilt_warning) reward -= cfg.tilt_penalty;
    const bool reached = next.termination == FailureReason::kNone &&
                         std::hypot(spec.goal.x - next.state.x, spec.goal.y - next.state.y) <= cfg.goal_tolerance;
    if (reached) reward += cfg.goal_reward;
    result.discounted_return += discount * reward;
    discount *= cfg.gamma;
    result.steps_used = t + 1;
    state = next.state;
    if (trace) trace->push_back({t, state.x, state.y, state.heading, a.v, a.omega, reward});
    if (reached) {
      result.success = true;
      return result;
    }
    if (next.termination != FailureReason::kNone) {
      result.failure_reason = next.termination;
      return result;
    }
  }
  result.failure_reason = FailureReason::kTimeout;
  return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out << "t,x,y,heading,v,omega,reward\n";
  char line[256];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.x, r.y, r.heading, r.v,
                  r.omega, r.reward);
    out << line;
  }
  if (!out) fail(ErrorCode::kIoFailure, "failed writing " + path.string());
}

std::optional<EpisodeSpec> sample_episode(const Terrain& terrain, Rng& rng) {
  const auto& cells = terrain.start_cells();
  if (cells.empty()) return std::nullopt;
  const auto& cfg = terrain.config();
  const auto& map = terrain.map();
  const auto cell = cells[rng.uniform_index(cells.size())];
  EpisodeSpec spec;
  spec.max_steps = cfg.max_steps;
  spec.dt = cfg.dt;
  spec.start.x = (cell % static_cast<std::uint32_t>(map.width())) * map.resolution();
  spec.start.y = (cell / static_cast<std::uint32_t>(map.width())) * map.resolution();
  const double limit = cfg.start_slope_fraction * std::tan(cfg.tilt_limit);
  constexpr int kGoalAttempts = 32;
  for (int attempt = 0; attempt < kGoalAttempts; ++attempt) {
    const double r = rng.uniform(cfg.goal_distance_min, cfg.goal_distance_max);
    const double bearing = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Goal g{spec.start.x + r * std::cos(bearing), spec.start.y + r * std::sin(bearing)};
    if (!terrain.inside(g.x, g.y) || terrain.slope_at(g.x, g.y) >= limit) continue;
    spec.goal = g;
    spec.start.heading = wrap_angle(bearing - rng.uniform(-cfg.heading_spread, cfg.heading_spread));
    return spec;
  }
  return std::nullopt;
}

SuccessEvaluation evaluate_policy(const Terrain& terrain, const Policy& policy, int n_pairs,
                                  std::uint64_t seed, int jobs) {
  require(n_pairs >= 1, ErrorCode::kInvalidArgument, "n_pairs must be positive");
  SuccessEvaluation eval;
  eval.episodes = n_pairs;
  if (terrain.start_cells().empty()) {
    eval.valid = false;
    return eval;
  }
  std::vector<EpisodeResult> results(static_cast<std::size_t>(n_pairs));
  parallel_for(results.size(), jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, "pair", i));
    if (auto spec = sample_episode(terrain, rng)) results[i] = run_episode(terrain, *spec, policy);
  });
  int successes = 0;
  double total = 0.0;
  for (const auto& r : results) {
    successes += r.success ? 1 : 0;
    total += r.discounted_return;
  }
  eval.success_rate = static_cast<double>(successes) / n_pairs;
  eval.mean_return = total / n_pairs;
  return eval;
}

double success_rate(const Terrain& terrain, const Policy& policy, int n_pairs, std::uint64_t seed, int jobs) {
  return evaluate_policy(terrain, policy, n_pairs, seed, jobs).success_rate;
}

double oracle_success(const Heightmap& map, double rho_max) {
  require(rho_max > 0.0, ErrorCode::kInvalidArgument, "rho_max must be positive");
  return std::clamp(1.0 - compute_stats(map).roughness / rho_max, 0.0, 1.0);
}

double oracle_success(const Heightmap& map, const std::function<double(double)>& difficulty_curve) {
  return std::clamp(difficulty_curve(compute_stats(map).roughness), 0.0, 1.0);
}

}  // namespace adtg
