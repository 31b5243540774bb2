#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "adtg/curriculum.hpp"
#include "adtg/diffusion.hpp"
#include "adtg/diversity.hpp"
#include "adtg/error.hpp"
#include "adtg/experiments.hpp"
#include "adtg/guidance.hpp"
#include "adtg/heightfield.hpp"
#include "adtg/learner.hpp"
#include "adtg/mlp_predictor.hpp"
#include "adtg/navsim.hpp"
#include "adtg/parallel.hpp"
#include "adtg/procgen.hpp"

namespace fs = std::filesystem;

namespace adtg::cli {
namespace {

std::string defaults_footer() {
  const RunConfig defaults;
  std::string text = "Config keys (key=value in --config files or --set), with defaults:\n";
  for (const auto& key : config_keys()) {
    std::string value = get_config_value(defaults, key.name);
    if (value.empty()) value = "\"\"";
    text += "  " + key.name + "=" + value + "  " + key.description + "\n";
  }
  text += "Environment: ADTG_SEED overrides the seed from --config; --seed overrides both.\n";
  return text;
}

void apply_mode(RunConfig& config, std::string mode) {
  const std::string suffix = "_oracle";
  if (mode.size() > suffix.size() && mode.compare(mode.size() - suffix.size(), suffix.size(), suffix) == 0) {
    mode.resize(mode.size() - suffix.size());
    config.curriculum.oracle = true;
  }
  config.curriculum.mode = parse_curriculum_mode(mode);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIoFailure, "write failed: " + path.string());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

GaussianMixturePrior build_prior(const CurriculumConfig& c) {
  return make_bump_prior(c.prior, c.width, c.height, c.resolution);
}

std::unique_ptr<NoisePredictor> build_predictor(const CurriculumConfig& c, const GaussianMixturePrior& prior) {
  if (c.predictor_path.empty()) return std::make_unique<AnalyticMixturePredictor>(prior);
  auto model = MlpNoisePredictor::load(c.predictor_path);
  if (model.data_dim() != c.width * c.height)
    fail(ErrorCode::kDimensionMismatch, "predictor size does not match the configured map size");
  return std::make_unique<MlpNoisePredictor>(std::move(model));
}

NoiseSchedule build_schedule(const CurriculumConfig& c) { return make_cosine_schedule(c.steps, c.schedule_offset); }

struct DatasetFile {
  fs::path path;
  Heightmap map;
};

std::vector<DatasetFile> read_dataset_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kIoFailure, "not a directory: " + dir.string());
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ahf") paths.push_back(entry.path());
  if (paths.empty()) fail(ErrorCode::kEmptyDataset, "no .ahf files in " + dir.string());
  std::sort(paths.begin(), paths.end());
  std::vector<DatasetFile> out;
  out.reserve(paths.size());
  for (auto& p : paths) {
    Heightmap map = read_heightmap(p);
    out.push_back({std::move(p), std::move(map)});
  }
  return out;
}

// success.csv: `name,success_rate` rows keyed by file stem.
std::map<std::string, double> read_success_table(const fs::path& path) {
  std::map<std::string, double> table;
  std::istringstream in(read_text(path));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::kInvalidArgument, "malformed success table row: " + line);
    const std::string name = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (first) {
      first = false;
      if (name == "name") continue;
    }
    std::size_t used = 0;
    double s = 0.0;
    try {
      s = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) fail(ErrorCode::kInvalidArgument, "bad success rate: " + line);
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorCode::kOutOfRange, "success rate outside [0, 1]: " + line);
    table[name] = s;
  }
  return table;
}

void write_map_outputs(const Heightmap& map, const fs::path& path, const std::string& csv) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_heightmap(map, path);
  if (!csv.empty()) write_heightmap_csv(map, csv);
}

void print_stats(const Heightmap& map) {
  const TerrainStats s = compute_stats(map);
  std::printf("width=%d\nheight=%d\nresolution=%s\nmean=%s\nvariance=%s\nroughness=%s\nmin=%s\nmax=%s\n",
              map.width(), map.height(), fmt(map.resolution()).c_str(), fmt(s.mean).c_str(),
              fmt(s.variance).c_str(), fmt(s.roughness).c_str(), fmt(s.min).c_str(), fmt(s.max).c_str());
}

void require_shape(const Heightmap& map, const CurriculumConfig& c, const std::string& what) {
  if (map.width() != c.width || map.height() != c.height)
    fail(ErrorCode::kDimensionMismatch,
         what + " is " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
             " but the config expects " + std::to_string(c.width) + "x" + std::to_string(c.height));
}

}  // namespace

void CommonOptions::add_to(CLI::App& app, bool with_mode, bool with_out) {
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root seed (u64)");
  if (with_mode) app.add_option("--mode", mode, "adtg, pgc, pg, n_at or dtg; append _oracle for oracle runs");
  if (with_out) app.add_option("--out", out, "output directory");
  app.add_option("--jobs", jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--set", overrides, "extra key=value override, repeatable")->take_all();
  app.footer(defaults_footer());
}

RunConfig CommonOptions::resolve() const {
  RunConfig config;
  if (!config_path.empty()) config = load_config(config_path, config);
  apply_seed_env(config);
  if (seed) config.seed = *seed;
  if (mode) apply_mode(config, *mode);
  if (out) config.out = *out;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kInvalidConfig, "--set expects key=value, got " + kv);
    const std::string key = kv.substr(0, eq);
    if (key == "mode") {
      apply_mode(config, kv.substr(eq + 1));
    } else {
      set_config_value(config, key, kv.substr(eq + 1));
    }
  }
  config.curriculum.validate();
  return config;
}

int CommonOptions::worker_count() const { return jobs > 0 ? jobs : default_jobs(); }

void register_schedule(CLI::App& app) {
  auto* cmd = app.add_subcommand("schedule", "print the cosine noise schedule as CSV");
  struct Opts {
    int steps = 64;
    double offset = 0.008;
    std::string output;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--K", opts->steps, "diffusion steps")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--offset", opts->offset, "cosine offset s")->capture_default_str();
  cmd->add_option("--output", opts->output, "write to a file instead of stdout");
  cmd->callback([opts] {
    const NoiseSchedule schedule = make_cosine_schedule(opts->steps, opts->offset);
    std::string text = "k,beta,alpha,alpha_bar\n";
    for (int k = 1; k <= schedule.steps(); ++k)
      text += std::to_string(k) + "," + fmt(schedule.beta(k)) + "," + fmt(schedule.alpha(k)) + "," +
              fmt(schedule.alpha_bar(k)) + "\n";
    if (opts->output.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      write_text(opts->output, text);
    }
  });
}

void register_gen_proc(CLI::App& app) {
  auto* cmd = app.add_subcommand("gen-proc", "generate one procedural terrain");
  struct Opts {
    CommonOptions common;
    std::string kind = "random_uniform";
    bool random = false;
    std::optional<double> height, step, grade, size, amplitude;
    std::optional<int> count;
    std::string output;
    std::string csv;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, false);
  cmd->add_option("--kind", opts->kind, "random_uniform, slope, discrete_obstacles or wave")
      ->capture_default_str();
  cmd->add_flag("--random", opts->random, "draw every parameter uniformly within its range");
  cmd->add_option("--height", opts->height, "uniform / obstacle height (m)");
  cmd->add_option("--step", opts->step, "uniform neighbour step limit (m)");
  cmd->add_option("--grade", opts->grade, "slope grade (rise/run)");
  cmd->add_option("--size", opts->size, "obstacle side (m)");
  cmd->add_option("--count", opts->count, "obstacle or wave count");
  cmd->add_option("--amplitude", opts->amplitude, "wave amplitude (m)");
  cmd->add_option("--output", opts->output, "output .ahf file")->required();
  cmd->add_option("--csv", opts->csv, "also write a row,col,elevation CSV");
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    const ProcKind kind = parse_proc_kind(opts->kind);
    ProcGenSpec spec;
    if (opts->random) {
      Rng rng = make_stream(config.seed, "gen_proc");
      spec = sample_procedural_spec(kind, rng);
    } else {
      switch (kind) {
        case ProcKind::kRandomUniform: {
          RandomUniformParams p;
          if (opts->height) p.height = *opts->height;
          if (opts->step) p.step = *opts->step;
          spec.params = p;
          break;
        }
        case ProcKind::kSlope: {
          SlopeParams p;
          if (opts->grade) p.grade = *opts->grade;
          spec.params = p;
          break;
        }
        case ProcKind::kDiscreteObstacles: {
          DiscreteObstaclesParams p;
          if (opts->height) p.height = *opts->height;
          if (opts->size) p.size = *opts->size;
          if (opts->count) p.count = *opts->count;
          spec.params = p;
          break;
        }
        case ProcKind::kWave: {
          WaveParams p;
          if (opts->count) p.count = *opts->count;
          if (opts->amplitude) p.amplitude = *opts->amplitude;
          spec.params = p;
          break;
        }
      }
      spec.seed = derive_seed(config.seed, "gen_proc");
    }
    const Heightmap map = generate_procedural(spec, c.width, c.height, c.resolution);
    write_map_outputs(map, opts->output, opts->csv);
    std::printf("spec=%s\n", describe(spec).c_str());
    print_stats(map);
  });
}

void register_sample_prior(CLI::App& app) {
  auto* cmd = app.add_subcommand("sample-prior", "draw terrains from the bump-mixture prior");
  struct Opts {
    CommonOptions common;
    int count = 1;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd);
  cmd->add_option("--count", opts->count, "number of terrains")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const GaussianMixturePrior prior = build_prior(config.curriculum);
    const fs::path dir = config.out;
    fs::create_directories(dir);
    std::vector<std::optional<PriorSample>> samples(static_cast<std::size_t>(opts->count));
    parallel_for(samples.size(), opts->common.worker_count(), [&](std::size_t i) {
      Rng rng = make_stream(config.seed, "sample_prior", i);
      samples[i] = sample_prior_component(prior, rng);
    });
    std::string table = "name,component,roughness\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "%04zu", i);
      write_heightmap(samples[i]->map, dir / (std::string(name) + ".ahf"));
      table += std::string(name) + "," + std::to_string(samples[i]->component) + "," +
               fmt(compute_stats(samples[i]->map).roughness) + "\n";
    }
    write_text(dir / "samples.csv", table);
    std::printf("wrote %d terrains to %s\n", opts->count, dir.string().c_str());
  });
}

void register_diffuse(CLI::App& app) {
  auto* cmd = app.add_subcommand("diffuse", "forward-diffuse a terrain to step k and reverse-sample it back");
  struct Opts {
    CommonOptions common;
    std::string input;
    int k = 16;
    std::string output;
    std::string noisy;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, false);
  cmd->add_option("--input", opts->input, "input .ahf file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-k,--k", opts->k, "forward step")->capture_default_str();
  cmd->add_option("--output", opts->output, "reconstructed .ahf file")->required();
  cmd->add_option("--noisy", opts->noisy, "also write the noisy latent e_k as .ahf");
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    const Heightmap input = read_heightmap(opts->input);
    require_shape(input, c, "input");
    const GaussianMixturePrior prior = build_prior(c);
    const NoiseSchedule schedule = build_schedule(c);
    const auto predictor = build_predictor(c, prior);
    const Latent noisy = forward_diffuse(input, opts->k, schedule, derive_seed(config.seed, "diffuse_forward"));
    const Heightmap out = reverse_sample(noisy, *predictor, schedule, derive_seed(config.seed, "diffuse_reverse"));
    write_map_outputs(out, opts->output, "");
    if (!opts->noisy.empty()) write_map_outputs(noisy.to_map(), opts->noisy, "");
    double sq = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out.data()[i] - input.data()[i];
      sq += d * d;
    }
    std::printf("k=%d\nalpha_bar=%s\nrmse=%s\ninput_roughness=%s\noutput_roughness=%s\n", opts->k,
                fmt(schedule.alpha_bar(opts->k)).c_str(), fmt(std::sqrt(sq / out.size())).c_str(),
                fmt(compute_stats(input).roughness).c_str(), fmt(compute_stats(out).roughness).c_str());
  });
}

void register_synthesize(CLI::App& app) {
  auto* cmd = app.add_subcommand("synthesize", "one performance-guided synthesis from a dataset directory");
  struct Opts {
    CommonOptions common;
    std::string dataset;
    std::string success;
    std::optional<int> k;
    std::string output;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, false);
  cmd->add_option("--dataset", opts->dataset, "directory of .ahf terrains")->required();
  cmd->add_option("--success", opts->success,
                  "CSV of name,success_rate (name = file stem); defaults to <dataset>/success.csv, "
                  "falling back to the roughness oracle");
  cmd->add_option("-k,--k", opts->k, "forward step; default derives it from the dataset variability");
  cmd->add_option("--output", opts->output, "output .ahf file")->required();
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    const auto files = read_dataset_dir(opts->dataset);
    fs::path success_path = opts->success;
    if (success_path.empty() && fs::exists(fs::path(opts->dataset) / "success.csv"))
      success_path = fs::path(opts->dataset) / "success.csv";
    std::map<std::string, double> table;
    if (!success_path.empty()) table = read_success_table(success_path);

    std::vector<TerrainRecord> dataset;
    std::vector<Heightmap> maps;
    for (std::size_t i = 0; i < files.size(); ++i) {
      require_shape(files[i].map, c, files[i].path.filename().string());
      const std::string stem = files[i].path.stem().string();
      double s = 0.0;
      if (success_path.empty()) {
        s = oracle_success(files[i].map, c.oracle_roughness_max);
      } else {
        const auto it = table.find(stem);
        if (it == table.end()) fail(ErrorCode::kInvalidArgument, "no success rate for " + stem);
        s = it->second;
      }
      dataset.push_back({i, files[i].map, s, 0, TerrainOrigin::kSeed});
      maps.push_back(files[i].map);
    }

    const GaussianMixturePrior prior = build_prior(c);
    const NoiseSchedule schedule = build_schedule(c);
    const auto predictor = build_predictor(c, prior);
    int k = 0;
    double lambda = 0.0;
    if (opts->k) {
      k = *opts->k;
    } else {
      if (maps.size() < 2) fail(ErrorCode::kEmptyDataset, "need at least 2 terrains to derive k");
      std::vector<Heightmap> reference;
      for (int i = 0; i < c.initial_size; ++i)
        reference.push_back(sample_prior(prior, derive_seed(config.seed, "initial", i)));
      const double ref = raw_variability(reference, c.pca_components);
      lambda = assess_variability(maps, c.pca_components, ref).lambda_var;
      k = forward_step(lambda, c.steps);
    }
    if (k < 1 || k > c.steps) fail(ErrorCode::kOutOfRange, "k must lie in [1, K]");
    Rng rng = make_stream(config.seed, "synthesize", 0);
    const SynthesisResult result = synthesize(dataset, k, schedule, *predictor, c.weighting, c.selection, rng);
    write_map_outputs(result.map, opts->output, "");
    std::string ids;
    for (const auto id : result.source_ids) {
      if (!ids.empty()) ids += ";";
      ids += files[id].path.stem().string();
    }
    std::printf("k=%d\nlambda_var=%s\npredicted_success=%s\nweight_mass=%s\nsources=%s\n", result.k,
                fmt(lambda).c_str(), fmt(result.predicted_success).c_str(), fmt(result.weight_mass).c_str(),
                ids.c_str());
  });
}

void register_variability(CLI::App& app) {
  auto* cmd = app.add_subcommand("variability", "PCA variability report for a dataset directory");
  struct Opts {
    CommonOptions common;
    std::string dataset;
    std::optional<int> m;
    std::optional<double> reference;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, false);
  cmd->add_option("--dataset", opts->dataset, "directory of .ahf terrains")->required();
  cmd->add_option("-m,--components", opts->m, "principal components (default pca_components)");
  cmd->add_option("--reference", opts->reference,
                  "reference scale; default is the variability of initial_size prior samples");
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    const auto files = read_dataset_dir(opts->dataset);
    std::vector<Heightmap> maps;
    for (const auto& f : files) maps.push_back(f.map);
    const int m = opts->m.value_or(c.pca_components);
    double ref = 0.0;
    if (opts->reference) {
      ref = *opts->reference;
    } else {
      const GaussianMixturePrior prior = build_prior(c);
      std::vector<Heightmap> reference;
      for (int i = 0; i < c.initial_size; ++i)
        reference.push_back(sample_prior(prior, derive_seed(config.seed, "initial", i)));
      ref = raw_variability(reference, c.pca_components);
    }
    const VariabilityReport report = assess_variability(maps, m, ref);
    const auto variances = principal_variances(maps, m);
    std::printf("terrains=%zu\nm=%d\nraw_variance=%s\nreference_scale=%s\nlambda_var=%s\nk=%d\n", maps.size(),
                report.m, fmt(report.raw_variance).c_str(), fmt(report.reference_scale).c_str(),
                fmt(report.lambda_var).c_str(), forward_step(report.lambda_var, c.steps));
    for (std::size_t i = 0; i < variances.size(); ++i) std::printf("pc%zu=%s\n", i + 1, fmt(variances[i]).c_str());
  });
}

void register_train(CLI::App& app) {
  auto* cmd = app.add_subcommand("train", "run a full curriculum");
  struct Opts {
    CommonOptions common;
    std::string resume;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, true, true);
  cmd->add_option("--resume", opts->resume, "continue from a previous --out directory")->check(CLI::ExistingDirectory);
  cmd->callback([opts] {
    RunConfig config = opts->common.resolve();
    const int jobs = opts->common.worker_count();
    const fs::path out = config.out;
    std::vector<MetricsRow> rows;
    std::string previous_metrics;
    std::unique_ptr<CurriculumRunner> runner;
    if (opts->resume.empty()) {
      runner = std::make_unique<CurriculumRunner>(config.curriculum, config.seed, jobs);
    } else {
      CurriculumState state = load_checkpoint(opts->resume);
      config.seed = state.root_seed;
      const fs::path old_metrics = fs::path(opts->resume) / "metrics.csv";
      if (fs::exists(old_metrics)) previous_metrics = read_text(old_metrics);
      runner = std::make_unique<CurriculumRunner>(config.curriculum, std::move(state), jobs);
    }
    fs::create_directories(out);
    write_run_manifest(config, out / "run_manifest");
    rows = runner->run();

    std::string text = previous_metrics.empty() ? metrics_csv_header() : previous_metrics;
    for (const auto& row : rows) text += format_metrics_row(row);
    write_text(out / "metrics.csv", text);
    save_checkpoint(runner->state(), out);
    write_policy_csv(runner->state().policy.mean, out / "policy.csv");

    std::printf("mode=%s\nepochs=%d\nterrains=%zu\n", to_string(config.curriculum.mode), runner->state().epoch,
                runner->state().dataset.size());
    const auto last = std::find_if(rows.rbegin(), rows.rend(), [](const MetricsRow& r) { return r.phase == "eval"; });
    if (last != rows.rend()) {
      if (last->heldout_return) std::printf("heldout_return=%s\n", fmt(*last->heldout_return).c_str());
      if (last->heldout_success) std::printf("heldout_success=%s\n", fmt(*last->heldout_success).c_str());
    }
  });
}

void register_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "evaluate a saved policy on the held-out terrains");
  struct Opts {
    CommonOptions common;
    std::string policy;
    bool goal_seeking = false;
    std::string per_terrain;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, true);
  cmd->add_option("--policy", opts->policy, "policy CSV (default <out>/policy.csv)");
  cmd->add_flag("--goal-seeking", opts->goal_seeking, "evaluate the terrain-blind goal-seeking reference instead");
  cmd->add_option("--per-terrain", opts->per_terrain, "write per-terrain results as CSV");
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    const int jobs = opts->common.worker_count();
    const auto heldout = make_heldout_set(c.heldout, c.width, c.height, c.resolution);
    std::unique_ptr<Policy> policy;
    if (opts->goal_seeking) {
      policy = std::make_unique<GoalSeekingPolicy>();
    } else {
      const fs::path path = opts->policy.empty() ? fs::path(config.out) / "policy.csv" : fs::path(opts->policy);
      policy = std::make_unique<LinearPolicy>(read_policy_csv(path));
    }
    std::string table = "env_id,target_roughness,success_rate,normalized_return\n";
    double total_success = 0.0;
    double total_return = 0.0;
    for (std::size_t i = 0; i < heldout.size(); ++i) {
      const Terrain terrain(heldout[i].map, c.nav);
      const SuccessEvaluation ev =
          evaluate_policy(terrain, *policy, c.heldout.pairs, derive_seed(c.heldout.seed, "heldout_pairs", i), jobs);
      const double ret = ev.mean_return / c.nav.goal_reward;
      total_success += ev.success_rate;
      total_return += ret;
      table += std::to_string(heldout[i].id) + "," + fmt(heldout[i].target_roughness) + "," +
               fmt(ev.success_rate) + "," + fmt(ret) + "\n";
    }
    if (!opts->per_terrain.empty()) write_text(opts->per_terrain, table);
    const double n = static_cast<double>(heldout.size());
    std::printf("terrains=%zu\npairs=%d\nheldout_success=%s\nheldout_return=%s\n", heldout.size(),
                c.heldout.pairs, fmt(total_success / n).c_str(), fmt(total_return / n).c_str());
  });
}

void register_consistency(CLI::App& app) {
  auto* cmd = app.add_subcommand("consistency", "predicted versus actual success of guided syntheses");
  struct Opts {
    CommonOptions common;
    ConsistencyConfig cc;
    std::string output;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, true);
  cmd->add_option("--syntheses", opts->cc.syntheses, "number of syntheses")->capture_default_str();
  cmd->add_option("--dataset-size", opts->cc.dataset_size, "oracle-measured prior samples")->capture_default_str();
  cmd->add_option("--k-min", opts->cc.k_min, "smallest forward step")->capture_default_str();
  cmd->add_option("--k-max", opts->cc.k_max, "largest forward step, 0 = K/2")->capture_default_str();
  cmd->add_option("--sources-min", opts->cc.sources_min, "fewest sources per synthesis")->capture_default_str();
  cmd->add_option("--sources-max", opts->cc.sources_max, "most sources per synthesis")->capture_default_str();
  cmd->add_option("--output", opts->output, "CSV path (default <out>/consistency.csv)");
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    ConsistencyConfig cc = opts->cc;
    cc.oracle_roughness_max = c.oracle_roughness_max;
    const GaussianMixturePrior prior = build_prior(c);
    const NoiseSchedule schedule = build_schedule(c);
    const auto predictor = build_predictor(c, prior);
    const auto rows =
        run_consistency(prior, schedule, *predictor, c.weighting, cc, config.seed, opts->common.worker_count());
    const fs::path path = opts->output.empty() ? fs::path(config.out) / "consistency.csv" : fs::path(opts->output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_consistency_csv(rows, path);
    std::vector<double> predicted, actual;
    for (const auto& r : rows) {
      predicted.push_back(r.predicted);
      actual.push_back(r.actual);
    }
    std::printf("syntheses=%zu\npearson=%s\nmae=%s\ncsv=%s\n", rows.size(), fmt(pearson(predicted, actual)).c_str(),
                fmt(mean_abs_error(predicted, actual)).c_str(), path.string().c_str());
  });
}

void register_train_predictor(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-predictor", "fit an MLP noise predictor on terrains");
  struct Opts {
    CommonOptions common;
    std::string dataset;
    int samples = 256;
    PredictorTrainingConfig tc;
    std::string output;
  };
  auto opts = std::make_shared<Opts>();
  opts->common.add_to(*cmd, false, false);
  cmd->add_option("--dataset", opts->dataset, "directory of .ahf terrains (default: prior samples)");
  cmd->add_option("--samples", opts->samples, "prior samples when no dataset is given")->capture_default_str();
  cmd->add_option("--hidden", opts->tc.hidden, "hidden width")->capture_default_str();
  cmd->add_option("--embedding", opts->tc.embedding_dim, "step embedding size")->capture_default_str();
  cmd->add_option("--learning-rate", opts->tc.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--batch", opts->tc.batch_size, "minibatch size")->capture_default_str();
  cmd->add_option("--iterations", opts->tc.steps, "SGD updates")->capture_default_str();
  cmd->add_option("--output", opts->output, "model file")->required();
  cmd->callback([opts] {
    const RunConfig config = opts->common.resolve();
    const auto& c = config.curriculum;
    std::vector<Heightmap> maps;
    if (!opts->dataset.empty()) {
      for (auto& f : read_dataset_dir(opts->dataset)) {
        require_shape(f.map, c, f.path.filename().string());
        maps.push_back(std::move(f.map));
      }
    } else {
      const GaussianMixturePrior prior = build_prior(c);
      for (int i = 0; i < opts->samples; ++i)
        maps.push_back(sample_prior(prior, derive_seed(config.seed, "predictor_data", i)));
    }
    const NoiseSchedule schedule = build_schedule(c);
    const TrainedPredictor trained =
        train_predictor(maps, schedule, opts->tc, derive_seed(config.seed, "predictor_train"));
    const fs::path path = opts->output;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    trained.model.save(path);
    const auto& h = trained.loss_history;
    std::printf("parameters=%zu\ninitial_loss=%s\nfinal_loss=%s\n", trained.model.parameter_count(),
                h.empty() ? "" : fmt(h.front()).c_str(), h.empty() ? "" : fmt(h.back()).c_str());
  });
}

}  // namespace adtg::cli
