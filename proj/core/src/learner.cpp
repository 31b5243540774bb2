#include "adtg/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "adtg/error.hpp"
#include "adtg/parallel.hpp"

namespace adtg {

const std::array<const char*, kFeatureCount>& feature_names() {
  static const std::array<const char*, kFeatureCount> names = {
      "goal_distance", "bearing_error", "sin_bearing", "cos_bearing", "probe_m60",
      "probe_m30",     "probe_0",       "probe_p30",   "probe_p60"};
  return names;
}

FeatureVector policy_features(const Terrain& terrain, const RobotState& state, const Goal& goal) {
  constexpr std::array<double, 5> kProbeAngles = {-std::numbers::pi / 3, -std::numbers::pi / 6, 0.0,
                                                  std::numbers::pi / 6, std::numbers::pi / 3};
  const double dx = goal.x - state.x;
  const double dy = goal.y - state.y;
  const double bearing = wrap_angle(std::atan2(dy, dx) - state.heading);
  FeatureVector f{};
  f[0] = std::hypot(dx, dy);
  f[1] = bearing;
  f[2] = std::sin(bearing);
  f[3] = std::cos(bearing);
  for (std::size_t p = 0; p < kProbeAngles.size(); ++p) {
    const double a = state.heading + kProbeAngles[p];
    const double px = state.x + kProbeDistance * std::cos(a);
    const double py = state.y + kProbeDistance * std::sin(a);
    f[4 + p] = terrain.inside(px, py) ? terrain.slope_at(px, py) : kProbeOutside;
  }
  return f;
}

Action act(const PolicyParams& params, const Terrain& terrain, const RobotState& state, const Goal& goal) {
  const auto f = policy_features(terrain, state, goal);
  double v = 0.0;
  double w = 0.0;
  for (int i = 0; i < kFeatureCount; ++i) {
    v += params.at(0, i) * f[static_cast<std::size_t>(i)];
    w += params.at(1, i) * f[static_cast<std::size_t>(i)];
  }
  const auto& cfg = terrain.config();
  // NaN-safe clamps: a non-finite product maps to zero.
  Action a;
  a.v = std::isfinite(v) ? std::clamp(v, 0.0, cfg.v_max) : 0.0;
  a.omega = std::isfinite(w) ? std::clamp(w, -cfg.omega_max, cfg.omega_max) : 0.0;
  return a;
}

Action LinearPolicy::act(const Terrain& terrain, const RobotState& state, const Goal& goal) const {
  return adtg::act(params_, terrain, state, goal);
}

void TrainerConfig::validate() const {
  if (population < 1 || elite < 1 || elite > population) {
    fail(ErrorCode::kInvalidConfig, "need 1 <= elite <= population");
  }
  if (eval_pairs < 1) fail(ErrorCode::kInvalidConfig, "eval_pairs must be positive");
  if (!(initial_scale >= 0) || !(scale_decay > 0 && scale_decay <= 1) || !(scale_floor >= 0)) {
    fail(ErrorCode::kInvalidConfig, "invalid perturbation scale settings");
  }
}

double TrainerConfig::scale(int iteration) const {
  return std::max(scale_floor, initial_scale * std::pow(scale_decay, iteration));
}

CemState CemState::initial(const TrainerConfig& config, const PolicyParams& mean) {
  CemState s;
  s.mean = mean;
  s.sigma.fill(config.scale(0));
  return s;
}

CemResult optimize_step(const CemState& state, const Terrain& terrain, const TrainerConfig& config,
                        std::uint64_t seed, int jobs) {
  config.validate();
  CemResult result{state, {}};
  result.state.iteration = state.iteration + 1;
  if (terrain.start_cells().empty()) {
    result.stats.updated = false;
    return result;
  }
  const auto n = static_cast<std::size_t>(config.population);
  std::vector<PolicyParams> candidates(n);
  std::vector<double> fitness(n);
  const std::uint64_t pair_seed = derive_seed(seed, "cem_pairs");
  parallel_for(n, jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, "cem_perturb", i));
    for (std::size_t j = 0; j < kParamCount; ++j) {
      candidates[i].weights[j] = state.mean.weights[j] + state.sigma[j] * rng.normal();
    }
    fitness[i] = evaluate_policy(terrain, LinearPolicy(candidates[i]), config.eval_pairs, pair_seed).mean_return;
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
  const auto m = static_cast<std::size_t>(config.elite);

  PolicyParams mean{};
  std::array<double, kParamCount> var{};
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t j = 0; j < kParamCount; ++j) mean.weights[j] += candidates[order[e]].weights[j];
  }
  for (auto& w : mean.weights) w /= static_cast<double>(m);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t j = 0; j < kParamCount; ++j) {
      const double d = candidates[order[e]].weights[j] - mean.weights[j];
      var[j] += d * d;
    }
  }
  const double scale = config.scale(result.state.iteration);
  for (std::size_t j = 0; j < kParamCount; ++j) {
    result.state.sigma[j] = std::max(scale, std::sqrt(var[j] / static_cast<double>(m)));
  }
  result.state.mean = mean;

  result.stats.population_mean_return = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(n);
  double elite_sum = 0.0;
  for (std::size_t e = 0; e < m; ++e) elite_sum += fitness[order[e]];
  result.stats.elite_mean_return = elite_sum / static_cast<double>(m);
  result.stats.best_return = fitness[order.front()];
  return result;
}

std::string encode_policy_csv(const PolicyParams& params) {
  std::string out = "output";
  for (const char* name : feature_names()) out += std::string(",") + name;
  out += '\n';
  const char* rows[2] = {"v", "omega"};
  char buf[32];
  for (int r = 0; r < 2; ++r) {
    out += rows[r];
    for (int i = 0; i < kFeatureCount; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", params.at(r, i));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

PolicyParams decode_policy_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kTruncated, "policy CSV is empty");
  std::string expected = "output";
  for (const char* name : feature_names()) expected += std::string(",") + name;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) fail(ErrorCode::kBadMagic, "policy CSV header does not name the expected features");
  PolicyParams params;
  const char* rows[2] = {"v", "omega"};
  for (int r = 0; r < 2; ++r) {
    if (!std::getline(in, line)) fail(ErrorCode::kTruncated, "policy CSV is missing a row");
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    if (cell != rows[r]) fail(ErrorCode::kInvalidArgument, std::string("expected policy row '") + rows[r] + "'");
    for (int i = 0; i < kFeatureCount; ++i) {
      if (!std::getline(cells, cell, ',')) fail(ErrorCode::kTruncated, "policy CSV row is short");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidArgument, "policy CSV holds a non-numeric weight");
      }
      if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "policy weight is not finite");
      params.at(r, i) = v;
    }
  }
  return params;
}

void write_policy_csv(const PolicyParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out << encode_policy_csv(params);
  if (!out) fail(ErrorCode::kIoFailure, "failed writing " + path.string());
}

PolicyParams read_policy_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_policy_csv(buf.str());
}

}  // namespace adtg
