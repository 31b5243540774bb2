#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adtg/curriculum.hpp"

namespace adtg {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunConfig {
  CurriculumConfig curriculum;
  std::uint64_t seed = 0;
  std::string out = "run";
};

struct ConfigKey {
  std::string name;
  std::string description;
};

/// Every recognised key with a one-line description, in serialization order.
const std::vector<ConfigKey>& config_keys();

/// Sets one key from its text form. Throws Error(kInvalidConfig) for unknown
/// keys and malformed values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Parses `key=value` lines; blank lines and lines starting with '#' are
/// ignored. Later assignments win.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// All keys, one per line, in config_keys() order. parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Resolved config plus seed and artifact version.
void write_run_manifest(const RunConfig& config, const std::filesystem::path& path);

/// Applies ADTG_SEED when set. Throws Error(kInvalidConfig) if it is not a u64.
void apply_seed_env(RunConfig& config);

std::uint64_t parse_u64_value(const std::string& text, const std::string& what);

}  // namespace adtg
