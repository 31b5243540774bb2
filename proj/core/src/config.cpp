#include "adtg/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "adtg/error.hpp"

namespace adtg {

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || errno == ERANGE || !std::isfinite(v)) {
    fail(ErrorCode::kInvalidConfig, "'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(begin, &end, 10);
  if (text.empty() || end != begin + text.size() || errno == ERANGE || v < -2147483647L || v > 2147483647L) {
    fail(ErrorCode::kInvalidConfig, "'" + key + "' expects an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  fail(ErrorCode::kInvalidConfig, "'" + key + "' expects true or false, got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  ConfigKey key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Get>
Field real(std::string name, std::string desc, Get access) {
  return {{name, std::move(desc)},
          [name, access](RunConfig& c, const std::string& v) { access(c) = parse_double(v, name); },
          [access](const RunConfig& c) { return fmt(access(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field integer(std::string name, std::string desc, Get access) {
  return {{name, std::move(desc)},
          [name, access](RunConfig& c, const std::string& v) { access(c) = parse_int(v, name); },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field u64(std::string name, std::string desc, Get access) {
  return {{name, std::move(desc)},
          [name, access](RunConfig& c, const std::string& v) { access(c) = parse_u64_value(v, name); },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field boolean(std::string name, std::string desc, Get access) {
  return {{name, std::move(desc)},
          [name, access](RunConfig& c, const std::string& v) { access(c) = parse_bool(v, name); },
          [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(u64("seed", "root seed", [](RunConfig& c) -> auto& { return c.seed; }));
    f.push_back({{"mode", "curriculum: adtg, pgc, pg, n_at or dtg"},
                 [](RunConfig& c, const std::string& v) { c.curriculum.mode = parse_curriculum_mode(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.curriculum.mode)); }});
    f.push_back(boolean("oracle", "use the roughness oracle instead of rollouts",
                        [](RunConfig& c) -> auto& { return c.curriculum.oracle; }));
    f.push_back({{"out", "output directory"}, [](RunConfig& c, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out; }});
    f.push_back(integer("width", "terrain cells along x", [](RunConfig& c) -> auto& { return c.curriculum.width; }));
    f.push_back(integer("height", "terrain cells along y", [](RunConfig& c) -> auto& { return c.curriculum.height; }));
    f.push_back(real("resolution", "cell size in meters", [](RunConfig& c) -> auto& { return c.curriculum.resolution; }));
    f.push_back(integer("steps", "diffusion steps K", [](RunConfig& c) -> auto& { return c.curriculum.steps; }));
    f.push_back(real("schedule_offset", "cosine schedule offset s",
                     [](RunConfig& c) -> auto& { return c.curriculum.schedule_offset; }));
    f.push_back({{"predictor", "noise predictor file; empty uses the analytic prior predictor"},
                 [](RunConfig& c, const std::string& v) { c.curriculum.predictor_path = v; },
                 [](const RunConfig& c) { return c.curriculum.predictor_path; }});
    f.push_back(real("target_difficulty", "target success rate of the weighting",
                     [](RunConfig& c) -> auto& { return c.curriculum.weighting.target; }));
    f.push_back(real("temperature", "weighting width", [](RunConfig& c) -> auto& { return c.curriculum.weighting.temperature; }));
    f.push_back(real("band_lo", "lower edge of the target band", [](RunConfig& c) -> auto& { return c.curriculum.weighting.band_lo; }));
    f.push_back(real("band_hi", "upper edge of the target band", [](RunConfig& c) -> auto& { return c.curriculum.weighting.band_hi; }));
    f.push_back(integer("initial_sources", "sources drawn before correction",
                        [](RunConfig& c) -> auto& { return c.curriculum.selection.initial_sources; }));
    f.push_back(integer("max_sources", "cap on sources per synthesis",
                        [](RunConfig& c) -> auto& { return c.curriculum.selection.max_sources; }));
    f.push_back({{"pool_cap", "candidate sub-sample size"},
                 [](RunConfig& c, const std::string& v) {
                   c.curriculum.selection.pool_cap = static_cast<std::size_t>(parse_u64_value(v, "pool_cap"));
                 },
                 [](const RunConfig& c) { return std::to_string(c.curriculum.selection.pool_cap); }});
    f.push_back(integer("pca_components", "principal components in the variability score",
                        [](RunConfig& c) -> auto& { return c.curriculum.pca_components; }));
    f.push_back(integer("terrains_per_epoch", "new terrains per epoch",
                        [](RunConfig& c) -> auto& { return c.curriculum.terrains_per_epoch; }));
    f.push_back(integer("epochs", "epoch budget", [](RunConfig& c) -> auto& { return c.curriculum.epochs; }));
    f.push_back(integer("eval_every", "held-out evaluation cadence in epochs",
                        [](RunConfig& c) -> auto& { return c.curriculum.eval_every; }));
    f.push_back(integer("initial_size", "initial dataset size", [](RunConfig& c) -> auto& { return c.curriculum.initial_size; }));
    f.push_back(integer("refresh_age", "epochs before a success rate is re-measured",
                        [](RunConfig& c) -> auto& { return c.curriculum.refresh_age; }));
    f.push_back(integer("success_pairs", "episodes per success-rate measurement",
                        [](RunConfig& c) -> auto& { return c.curriculum.success_pairs; }));
    f.push_back(integer("heldout_size", "held-out terrain count", [](RunConfig& c) -> auto& { return c.curriculum.heldout.size; }));
    f.push_back(real("heldout_roughness_lo", "roughness of the easiest held-out terrain",
                     [](RunConfig& c) -> auto& { return c.curriculum.heldout.roughness_lo; }));
    f.push_back(real("heldout_roughness_hi", "roughness of the hardest held-out terrain",
                     [](RunConfig& c) -> auto& { return c.curriculum.heldout.roughness_hi; }));
    f.push_back(integer("heldout_bumps", "bumps per held-out terrain",
                        [](RunConfig& c) -> auto& { return c.curriculum.heldout.bumps; }));
    f.push_back(real("heldout_noise", "elevation noise on held-out terrain",
                     [](RunConfig& c) -> auto& { return c.curriculum.heldout.noise; }));
    f.push_back(integer("heldout_pairs", "episodes per held-out terrain",
                        [](RunConfig& c) -> auto& { return c.curriculum.heldout.pairs; }));
    f.push_back(u64("heldout_seed", "seed of the held-out set", [](RunConfig& c) -> auto& { return c.curriculum.heldout.seed; }));
    f.push_back(integer("prior_layouts", "bump layouts in the prior", [](RunConfig& c) -> auto& { return c.curriculum.prior.layouts; }));
    f.push_back(integer("prior_levels", "amplitude levels per layout", [](RunConfig& c) -> auto& { return c.curriculum.prior.levels; }));
    f.push_back(integer("prior_bumps", "bumps per layout", [](RunConfig& c) -> auto& { return c.curriculum.prior.bumps; }));
    f.push_back(real("prior_bump_sigma_lo", "smallest bump width (m)",
                     [](RunConfig& c) -> auto& { return c.curriculum.prior.bump_sigma_lo; }));
    f.push_back(real("prior_bump_sigma_hi", "largest bump width (m)",
                     [](RunConfig& c) -> auto& { return c.curriculum.prior.bump_sigma_hi; }));
    f.push_back(real("prior_amplitude_lo", "lowest amplitude level", [](RunConfig& c) -> auto& { return c.curriculum.prior.amplitude_lo; }));
    f.push_back(real("prior_amplitude_hi", "highest amplitude level", [](RunConfig& c) -> auto& { return c.curriculum.prior.amplitude_hi; }));
    f.push_back(real("prior_sigma0", "per-cell std of each prior component",
                     [](RunConfig& c) -> auto& { return c.curriculum.prior.sigma0; }));
    f.push_back(real("prior_level_decay", "weight ratio between consecutive amplitude levels",
                     [](RunConfig& c) -> auto& { return c.curriculum.prior.level_decay; }));
    f.push_back(u64("prior_seed", "seed of the prior layouts", [](RunConfig& c) -> auto& { return c.curriculum.prior.seed; }));
    f.push_back(real("v_max", "speed limit (m/s)", [](RunConfig& c) -> auto& { return c.curriculum.nav.v_max; }));
    f.push_back(real("omega_max", "turn-rate limit (rad/s)", [](RunConfig& c) -> auto& { return c.curriculum.nav.omega_max; }));
    f.push_back(real("dt", "control period (s)", [](RunConfig& c) -> auto& { return c.curriculum.nav.dt; }));
    f.push_back(integer("max_steps", "episode step budget", [](RunConfig& c) -> auto& { return c.curriculum.nav.max_steps; }));
    f.push_back(real("gamma", "discount factor", [](RunConfig& c) -> auto& { return c.curriculum.nav.gamma; }));
    f.push_back(real("goal_distance_min", "closest goal (m)", [](RunConfig& c) -> auto& { return c.curriculum.nav.goal_distance_min; }));
    f.push_back(real("goal_distance_max", "farthest goal (m)", [](RunConfig& c) -> auto& { return c.curriculum.nav.goal_distance_max; }));
    f.push_back(integer("population", "CEM population", [](RunConfig& c) -> auto& { return c.curriculum.trainer.population; }));
    f.push_back(integer("elite", "CEM elite count", [](RunConfig& c) -> auto& { return c.curriculum.trainer.elite; }));
    f.push_back(integer("eval_pairs", "episodes per CEM candidate", [](RunConfig& c) -> auto& { return c.curriculum.trainer.eval_pairs; }));
    f.push_back(real("initial_scale", "initial CEM perturbation scale",
                     [](RunConfig& c) -> auto& { return c.curriculum.trainer.initial_scale; }));
    f.push_back(real("scale_decay", "per-iteration scale decay", [](RunConfig& c) -> auto& { return c.curriculum.trainer.scale_decay; }));
    f.push_back(real("scale_floor", "minimum perturbation scale", [](RunConfig& c) -> auto& { return c.curriculum.trainer.scale_floor; }));
    f.push_back(real("oracle_roughness_max", "roughness at which the oracle reaches zero",
                     [](RunConfig& c) -> auto& { return c.curriculum.oracle_roughness_max; }));
    f.push_back(boolean("plateau_stop", "stop early when held-out progress stalls",
                        [](RunConfig& c) -> auto& { return c.curriculum.plateau.enabled; }));
    f.push_back(integer("plateau_window", "evaluations compared by the plateau rule",
                        [](RunConfig& c) -> auto& { return c.curriculum.plateau.window; }));
    f.push_back(real("plateau_min_improvement", "improvement below which training stops",
                     [](RunConfig& c) -> auto& { return c.curriculum.plateau.min_improvement; }));
    f.push_back(boolean("record_wall_time", "write elapsed milliseconds into the metrics",
                        [](RunConfig& c) -> auto& { return c.curriculum.record_wall_time; }));
    return f;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key.name == key) return f;
  }
  fail(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
}

}  // namespace

std::uint64_t parse_u64_value(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (text.empty() || text.front() == '-' || end != begin + text.size() || errno == ERANGE) {
    fail(ErrorCode::kInvalidConfig, "'" + what + "' expects an unsigned integer, got '" + text + "'");
  }
  return v;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return find_field(key).get(config); }

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kInvalidConfig, "line " + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    // Run manifests are valid configs; their version line is informational.
    if (key == "artifact_version") continue;
    set_config_value(base, key, trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key.name + "=" + f.get(config) + "\n";
  return out;
}

void write_run_manifest(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out << "# adtg run manifest\n";
  out << "artifact_version=" << kArtifactVersion << "\n";
  out << serialize_config(config);
  if (!out) fail(ErrorCode::kIoFailure, "failed writing " + path.string());
}

void apply_seed_env(RunConfig& config) {
  if (const char* env = std::getenv("ADTG_SEED"); env != nullptr && *env != '\0') {
    config.seed = parse_u64_value(env, "ADTG_SEED");
  }
}

}  // namespace adtg
