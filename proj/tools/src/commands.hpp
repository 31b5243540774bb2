#pragma once

#include <CLI11.hpp>
#include <optional>
#include <string>

#include "adtg/config.hpp"

namespace adtg::cli {

/// Flags every run-style subcommand shares. The config is resolved in
/// precedence order: defaults, --config file, ADTG_SEED, then explicit flags.
struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  int jobs = 0;  // 0 means all cores
  std::vector<std::string> overrides;

  void add_to(CLI::App& app, bool with_mode = false, bool with_out = true);
  RunConfig resolve() const;
  int worker_count() const;
};

void register_schedule(CLI::App& app);
void register_gen_proc(CLI::App& app);
void register_sample_prior(CLI::App& app);
void register_diffuse(CLI::App& app);
void register_synthesize(CLI::App& app);
void register_variability(CLI::App& app);
void register_train(CLI::App& app);
void register_eval(CLI::App& app);
void register_consistency(CLI::App& app);
void register_train_predictor(CLI::App& app);

}  // namespace adtg::cli
