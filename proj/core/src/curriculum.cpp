#include "adtg/curriculum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "adtg/diversity.hpp"
#include "adtg/error.hpp"
#include "adtg/mlp_predictor.hpp"
#include "adtg/parallel.hpp"

namespace adtg {

const char* to_string(CurriculumMode mode) noexcept {
  switch (mode) {
    case CurriculumMode::kAdtg: return "adtg";
    case CurriculumMode::kPgc: return "pgc";
    case CurriculumMode::kPg: return "pg";
    case CurriculumMode::kNat: return "n_at";
    case CurriculumMode::kDtg: return "dtg";
  }
  return "?";
}

CurriculumMode parse_curriculum_mode(const std::string& name) {
  for (auto m : {CurriculumMode::kAdtg, CurriculumMode::kPgc, CurriculumMode::kPg, CurriculumMode::kNat,
                 CurriculumMode::kDtg}) {
    if (name == to_string(m)) return m;
  }
  fail(ErrorCode::kInvalidConfig, "unknown mode '" + name + "' (expected adtg, pgc, pg, n_at or dtg)");
}

std::vector<HeldoutTerrain> make_heldout_set(const HeldoutConfig& config, int width, int height,
                                             double resolution) {
  require(config.size >= 1, ErrorCode::kInvalidConfig, "held-out set needs at least one terrain");
  require(config.roughness_lo > 0 && config.roughness_hi >= config.roughness_lo, ErrorCode::kInvalidConfig,
          "held-out roughness range is invalid");
  std::vector<HeldoutTerrain> out;
  const double ex = (width - 1) * resolution;
  const double ey = (height - 1) * resolution;
  for (int i = 0; i < config.size; ++i) {
    Rng rng(derive_seed(config.seed, "heldout", static_cast<std::uint64_t>(i)));
    const auto layout = random_bump_layout(config.bumps, ex, ey, 0.15, 0.35, rng);
    std::vector<double> noise(static_cast<std::size_t>(width) * height);
    for (auto& n : noise) n = config.noise * rng.normal();
    const Heightmap shape = make_bump_map(width, height, resolution, layout);
    auto render = [&](double amplitude) {
      std::vector<double> v(noise.size());
      const auto s = shape.data();
      for (std::size_t c = 0; c < v.size(); ++c) v[c] = amplitude * s[c] + noise[c];
      return Heightmap(width, height, resolution, std::move(v));
    };
    const double target = config.size == 1 ? config.roughness_lo
                                           : config.roughness_lo + (config.roughness_hi - config.roughness_lo) *
                                                                       i / (config.size - 1.0);
    double lo = 0.0;
    double hi = 1.0;
    for (int grow = 0; grow < 60 && compute_stats(render(hi)).roughness < target; ++grow) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (compute_stats(render(mid)).roughness < target ? lo : hi) = mid;
    }
    out.push_back({kHeldoutIdBase + static_cast<std::uint64_t>(i), target, render(0.5 * (lo + hi))});
  }
  return out;
}

void CurriculumConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidConfig, what); };
  if (width < Heightmap::kMinSide || height < Heightmap::kMinSide) bad("width and height must be >= 4");
  if (!(resolution > 0)) bad("resolution must be positive");
  if (steps < 2) bad("steps must be >= 2");
  if (!(schedule_offset > 0)) bad("schedule_offset must be positive");
  weighting.validate();
  if (selection.initial_sources < 1 || selection.max_sources < selection.initial_sources ||
      selection.max_sources > 16 || selection.pool_cap < 1) {
    bad("need 1 <= initial_sources <= max_sources <= 16 and pool_cap >= 1");
  }
  if (pca_components < 1) bad("pca_components must be positive");
  if (terrains_per_epoch < 0) bad("terrains_per_epoch must be >= 0");
  if (epochs < 0) bad("epochs must be >= 0");
  if (eval_every < 1) bad("eval_every must be positive");
  if (initial_size < 1) bad("initial_size must be positive");
  if (mode == CurriculumMode::kAdtg && initial_size < 2) bad("adtg mode needs initial_size >= 2");
  if (refresh_age < 1) bad("refresh_age must be positive");
  if (success_pairs < 1) bad("success_pairs must be positive");
  if (heldout.size < 1 || heldout.pairs < 1 || !(heldout.roughness_lo > 0) ||
      heldout.roughness_hi < heldout.roughness_lo || heldout.noise < 0 || heldout.bumps < 1) {
    bad("invalid held-out settings");
  }
  if (prior.layouts < 1 || prior.levels < 1 || prior.bumps < 1 || !(prior.sigma0 > 0) || !(prior.level_decay > 0) ||
      !(prior.bump_sigma_lo > 0) || prior.bump_sigma_hi < prior.bump_sigma_lo ||
      prior.amplitude_hi < prior.amplitude_lo) {
    bad("invalid prior settings");
  }
  nav.validate();
  trainer.validate();
  if (!(oracle_roughness_max > 0)) bad("oracle_roughness_max must be positive");
  if (plateau.window < 1 || plateau.min_improvement < 0) bad("invalid plateau settings");
}

std::string metrics_csv_header() {
  return "epoch,phase,env_id,success_rate,lambda_var,k,heldout_return,heldout_success,wall_ms\n";
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  std::string out = std::to_string(row.epoch) + "," + row.phase + ",";
  if (row.env_id) out += std::to_string(*row.env_id);
  out += "," + fmt(row.success_rate) + "," + fmt(row.lambda_var) + ",";
  if (row.k) out += std::to_string(*row.k);
  out += "," + fmt(row.heldout_return) + "," + fmt(row.heldout_success) + "," + fmt(row.wall_ms) + "\n";
  return out;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out << metrics_csv_header();
  for (const auto& r : rows) out << format_metrics_row(r);
  if (!out) fail(ErrorCode::kIoFailure, "failed writing " + path.string());
}

std::size_t select_weighted(std::span<const TerrainRecord> dataset, const WeightingParams& params, Rng& rng) {
  std::vector<std::size_t> idx;
  std::vector<double> w;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].measured()) continue;
    idx.push_back(i);
    w.push_back(weight(*dataset[i].success_rate, params));
  }
  if (idx.empty()) fail(ErrorCode::kEmptyDataset, "no measured records to select from");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return idx[i];
  }
  return idx.back();
}

std::size_t select_uniform(std::span<const TerrainRecord> dataset, Rng& rng) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].measured()) idx.push_back(i);
  }
  if (idx.empty()) fail(ErrorCode::kEmptyDataset, "no measured records to select from");
  return idx[rng.uniform_index(idx.size())];
}

std::array<PgcFamily, kProcKindCount> initial_pgc_families() {
  namespace lim = procgen_limits;
  std::array<PgcFamily, kProcKindCount> f;
  f[0].spec.params = RandomUniformParams{0.1, lim::kUniformStepMin};
  f[1].spec.params = SlopeParams{lim::kSlopeMin};
  f[2].spec.params = DiscreteObstaclesParams{lim::kObstacleHeightMin, 0.5, lim::kObstacleCountMin};
  f[3].spec.params = WaveParams{1, lim::kWaveAmplitudeMin};
  return f;
}

ProcGenSpec adapt_pgc_spec(const ProcGenSpec& spec, double success_rate, const WeightingParams& params) {
  namespace lim = procgen_limits;
  if (params.in_band(success_rate)) return spec;
  const bool harder = success_rate > params.band_hi;
  const double factor = harder ? 1.15 : 0.85;
  ProcGenSpec out = spec;
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RandomUniformParams>) {
          p.step = std::clamp(p.step * factor, lim::kUniformStepMin, lim::kUniformStepMax);
        } else if constexpr (std::is_same_v<T, SlopeParams>) {
          p.grade = std::clamp(p.grade * factor, lim::kSlopeMin, lim::kSlopeMax);
        } else if constexpr (std::is_same_v<T, DiscreteObstaclesParams>) {
          // Integer knob: move by at least one.
          int next = static_cast<int>(std::lround(p.count * factor));
          if (next == p.count) next += harder ? 1 : -1;
          p.count = std::clamp(next, lim::kObstacleCountMin, lim::kObstacleCountMax);
        } else {
          p.amplitude = std::clamp(p.amplitude * factor, lim::kWaveAmplitudeMin, lim::wave_amplitude_max(p.count));
        }
      },
      out.params);
  return out;
}

HeldoutResult evaluate_heldout(std::span<const HeldoutTerrain> heldout, const PolicyParams& policy,
                               const CurriculumConfig& config, int jobs) {
  require(!heldout.empty(), ErrorCode::kEmptyDataset, "held-out set is empty");
  std::vector<SuccessEvaluation> evals(heldout.size());
  const LinearPolicy pi(policy);
  parallel_for(heldout.size(), jobs, [&](std::size_t i) {
    const Terrain terrain(heldout[i].map, config.nav);
    evals[i] = evaluate_policy(terrain, pi, config.heldout.pairs, derive_seed(config.heldout.seed, "heldout_pairs", i));
  });
  HeldoutResult r;
  for (const auto& e : evals) {
    r.normalized_return += e.mean_return / config.nav.goal_reward;
    r.success_rate += e.success_rate;
  }
  r.normalized_return /= static_cast<double>(evals.size());
  r.success_rate /= static_cast<double>(evals.size());
  return r;
}

namespace {

NoiseSchedule schedule_for(const CurriculumConfig& c) {
  c.validate();
  return make_cosine_schedule(c.steps, c.schedule_offset);
}

}  // namespace

CurriculumRunner::CurriculumRunner(CurriculumConfig config, std::uint64_t seed, int jobs)
    : config_(std::move(config)),
      jobs_(std::max(jobs, 1)),
      prior_(make_bump_prior(config_.prior, config_.width, config_.height, config_.resolution)),
      schedule_(schedule_for(config_)) {
  setup();
  state_.root_seed = seed;
  state_.policy = CemState::initial(config_.trainer);
  state_.pgc = initial_pgc_families();
  for (int i = 0; i < config_.initial_size; ++i) {
    Rng rng(derive_seed(seed, "initial", static_cast<std::uint64_t>(i)));
    state_.dataset.push_back({state_.next_id++, sample_prior(prior_, rng), std::nullopt, -1, TerrainOrigin::kSeed});
  }
  if (state_.dataset.size() >= 2) {
    std::vector<Heightmap> maps;
    for (const auto& r : state_.dataset) maps.push_back(r.map);
    state_.reference_scale = raw_variability(maps, config_.pca_components);
  }
}

CurriculumRunner::CurriculumRunner(CurriculumConfig config, CurriculumState state, int jobs)
    : config_(std::move(config)),
      jobs_(std::max(jobs, 1)),
      prior_(make_bump_prior(config_.prior, config_.width, config_.height, config_.resolution)),
      schedule_(schedule_for(config_)),
      state_(std::move(state)) {
  setup();
  if (state_.dataset.empty()) fail(ErrorCode::kEmptyDataset, "checkpoint has an empty dataset");
  for (const auto& r : state_.dataset) {
    if (r.map.width() != config_.width || r.map.height() != config_.height) {
      fail(ErrorCode::kDimensionMismatch, "checkpoint terrain shape differs from the config");
    }
  }
}

void CurriculumRunner::setup() {
  if (config_.predictor_path.empty()) {
    predictor_ = std::make_unique<AnalyticMixturePredictor>(prior_);
  } else {
    auto mlp = MlpNoisePredictor::load(config_.predictor_path);
    if (mlp.data_dim() != config_.width * config_.height) {
      fail(ErrorCode::kDimensionMismatch, "predictor size does not match the terrain size");
    }
    predictor_ = std::make_unique<MlpNoisePredictor>(std::move(mlp));
  }
  heldout_ = make_heldout_set(config_.heldout, config_.width, config_.height, config_.resolution);
}

bool CurriculumRunner::finished() const noexcept { return state_.stopped || state_.epoch >= config_.epochs; }

double CurriculumRunner::measure(const TerrainRecord& record, int epoch) const {
  if (config_.oracle) return oracle_success(record.map, config_.oracle_roughness_max);
  const Terrain terrain(record.map, config_.nav);
  return evaluate_policy(terrain, LinearPolicy(state_.policy.mean), config_.success_pairs,
                         derive_seed(state_.root_seed, "refresh", record.id, static_cast<std::uint64_t>(epoch)))
      .success_rate;
}

void CurriculumRunner::refresh(int epoch) {
  std::vector<std::size_t> stale;
  for (std::size_t i = 0; i < state_.dataset.size(); ++i) {
    const auto& r = state_.dataset[i];
    if (!r.measured() || epoch - r.last_eval_epoch >= config_.refresh_age) stale.push_back(i);
  }
  std::vector<double> rates(stale.size());
  parallel_for(stale.size(), jobs_, [&](std::size_t j) { rates[j] = measure(state_.dataset[stale[j]], epoch); });
  for (std::size_t j = 0; j < stale.size(); ++j) {
    state_.dataset[stale[j]].success_rate = rates[j];
    state_.dataset[stale[j]].last_eval_epoch = epoch;
  }
}

std::vector<TerrainRecord> CurriculumRunner::generate(int epoch, std::vector<MetricsRow>& rows) {
  const auto n = static_cast<std::size_t>(config_.terrains_per_epoch);
  const auto e = static_cast<std::uint64_t>(epoch);
  const std::uint64_t seed = state_.root_seed;
  std::vector<std::optional<Heightmap>> maps(n);
  std::vector<std::optional<double>> predicted(n);
  std::optional<double> lambda;
  std::optional<int> k;
  TerrainOrigin origin = TerrainOrigin::kSynthesized;

  switch (config_.mode) {
    case CurriculumMode::kNat:
      return {};
    case CurriculumMode::kAdtg: {
      Rng pool_rng(derive_seed(seed, "pool", e));
      const auto pool = candidate_pool(state_.dataset, config_.selection.pool_cap, pool_rng);
      double raw = 0.0;
      if (pool.size() >= 2) {
        std::vector<Heightmap> pool_maps;
        pool_maps.reserve(pool.size());
        for (auto i : pool) pool_maps.push_back(state_.dataset[i].map);
        raw = raw_variability(pool_maps, config_.pca_components);
      }
      lambda = state_.reference_scale > 0.0 ? std::clamp(raw / state_.reference_scale, 0.0, 1.0) : 0.0;
      state_.lambda_history.push_back(*lambda);
      k = forward_step(*lambda, config_.steps);
      std::vector<std::optional<SynthesisResult>> results(n);
      parallel_for(n, jobs_, [&](std::size_t j) {
        Rng rng(derive_seed(seed, "synthesize", e, j));
        results[j] = synthesize(state_.dataset, pool, *k, schedule_, *predictor_, config_.weighting,
                                config_.selection, rng);
      });
      for (std::size_t j = 0; j < n; ++j) {
        predicted[j] = results[j]->predicted_success;
        maps[j] = std::move(results[j]->map);
      }
      break;
    }
    case CurriculumMode::kDtg: {
      k = config_.steps;
      parallel_for(n, jobs_, [&](std::size_t j) {
        Rng rng(derive_seed(seed, "dtg", e, j));
        const Latent start = pure_noise_latent(config_.width, config_.height, config_.resolution, schedule_, rng);
        maps[j] = reverse_sample(start, *predictor_, schedule_, rng);
      });
      break;
    }
    case CurriculumMode::kPg: {
      origin = TerrainOrigin::kProcedural;
      parallel_for(n, jobs_, [&](std::size_t j) {
        Rng rng(derive_seed(seed, "pg", e, j));
        auto spec = sample_procedural_spec(rng);
        spec.seed = rng.next_u64();
        maps[j] = generate_procedural(spec, config_.width, config_.height, config_.resolution);
      });
      break;
    }
    case CurriculumMode::kPgc: {
      origin = TerrainOrigin::kProcedural;
      std::vector<ProcGenSpec> specs(n);
      std::vector<std::size_t> family(n);
      for (std::size_t j = 0; j < n; ++j) {
        family[j] = (e * n + j) % kProcKindCount;
        auto& fam = state_.pgc[family[j]];
        if (fam.last_record) {
          const auto it = std::find_if(state_.dataset.begin(), state_.dataset.end(),
                                       [&](const TerrainRecord& r) { return r.id == *fam.last_record; });
          if (it != state_.dataset.end() && it->measured()) {
            fam.spec = adapt_pgc_spec(fam.spec, *it->success_rate, config_.weighting);
            fam.last_record.reset();
          }
        }
        specs[j] = fam.spec;
        specs[j].seed = derive_seed(seed, "pgc", e, j);
      }
      parallel_for(n, jobs_, [&](std::size_t j) {
        maps[j] = generate_procedural(specs[j], config_.width, config_.height, config_.resolution);
      });
      // Each family adapts from its most recent terrain once that one is measured.
      for (std::size_t j = 0; j < n; ++j) state_.pgc[family[j]].last_record = state_.next_id + j;
      break;
    }
  }

  std::vector<TerrainRecord> fresh;
  for (std::size_t j = 0; j < n; ++j) {
    fresh.push_back({state_.next_id + j, std::move(*maps[j]), std::nullopt, -1, origin});
    MetricsRow row;
    row.epoch = epoch;
    row.phase = "synth";
    row.env_id = fresh.back().id;
    row.success_rate = predicted[j];
    row.lambda_var = lambda;
    row.k = k;
    rows.push_back(row);
  }
  state_.next_id += n;
  return fresh;
}

std::vector<MetricsRow> CurriculumRunner::run_epoch() {
  if (finished()) return {};
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] {
    return config_.record_wall_time ? std::chrono::duration<double, std::milli>(clock::now() - t0).count() : 0.0;
  };
  const int epoch = state_.epoch;
  const auto e = static_cast<std::uint64_t>(epoch);
  std::vector<MetricsRow> rows;

  refresh(epoch);

  Rng select_rng(derive_seed(state_.root_seed, "select", e));
  const bool weighted = config_.mode == CurriculumMode::kAdtg || config_.mode == CurriculumMode::kPgc ||
                        config_.mode == CurriculumMode::kNat;
  const std::size_t chosen = weighted ? select_weighted(state_.dataset, config_.weighting, select_rng)
                                      : select_uniform(state_.dataset, select_rng);
  const TerrainRecord& selected = state_.dataset[chosen];
  if (!config_.oracle) {
    const Terrain terrain(selected.map, config_.nav);
    state_.policy = optimize_step(state_.policy, terrain, config_.trainer,
                                  derive_seed(state_.root_seed, "cem", e), jobs_)
                        .state;
  }
  MetricsRow select_row;
  select_row.epoch = epoch;
  select_row.phase = "select";
  select_row.env_id = selected.id;
  select_row.success_rate = selected.success_rate;
  select_row.wall_ms = elapsed();
  rows.push_back(select_row);

  const auto first_synth = rows.size();
  auto fresh = generate(epoch, rows);
  for (auto i = first_synth; i < rows.size(); ++i) rows[i].wall_ms = elapsed();
  for (auto& r : fresh) state_.dataset.push_back(std::move(r));

  state_.epoch = epoch + 1;
  if (state_.epoch % config_.eval_every == 0 || state_.epoch == config_.epochs) {
    MetricsRow eval;
    eval.epoch = epoch;
    eval.phase = "eval";
    double progress = 0.0;
    if (config_.oracle) {
      double total = 0.0;
      for (const auto& h : heldout_) total += oracle_success(h.map, config_.oracle_roughness_max);
      eval.heldout_success = total / static_cast<double>(heldout_.size());
      progress = *eval.heldout_success;
    } else {
      const auto r = evaluate_heldout(heldout_, state_.policy.mean, config_, jobs_);
      eval.heldout_return = r.normalized_return;
      eval.heldout_success = r.success_rate;
      progress = r.normalized_return;
    }
    eval.wall_ms = elapsed();
    rows.push_back(eval);
    state_.heldout_history.push_back(progress);
    const auto& h = state_.heldout_history;
    const auto w = static_cast<std::size_t>(config_.plateau.window);
    if (config_.plateau.enabled && h.size() > w && h.back() - h[h.size() - 1 - w] < config_.plateau.min_improvement) {
      state_.stopped = true;
    }
  }
  return rows;
}

std::vector<MetricsRow> CurriculumRunner::run() {
  std::vector<MetricsRow> all;
  while (!finished()) {
    auto rows = run_epoch();
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

CurriculumRun run_acrl(const CurriculumConfig& config, std::uint64_t seed, int jobs) {
  CurriculumRunner runner(config, seed, jobs);
  auto metrics = runner.run();
  return {runner.state(), std::move(metrics), runner.heldout()};
}

CurriculumRun run_baseline(CurriculumConfig config, CurriculumMode kind, std::uint64_t seed, int jobs) {
  config.mode = kind;
  return run_acrl(config, seed, jobs);
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {

constexpr const char* kStateFormat = "adtg-state-1";

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + fmt(values[i]);
  return out;
}

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "malformed number '" + cell + "' in state manifest");
    }
  }
  return out;
}

std::uint64_t parse_u64(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "malformed integer '" + text + "' in state manifest");
  }
}

std::string terrain_file(std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04llu.ahf", static_cast<unsigned long long>(id));
  return buf;
}

std::string encode_pgc(const ProcGenSpec& spec) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RandomUniformParams>) return fmt(p.height) + "," + fmt(p.step);
        else if constexpr (std::is_same_v<T, SlopeParams>) return fmt(p.grade);
        else if constexpr (std::is_same_v<T, DiscreteObstaclesParams>)
          return fmt(p.height) + "," + fmt(p.size) + "," + std::to_string(p.count);
        else return std::to_string(p.count) + "," + fmt(p.amplitude);
      },
      spec.params);
}

ProcGenSpec decode_pgc(ProcKind kind, const std::string& text) {
  const auto v = split_doubles(text);
  const std::size_t want[] = {2, 1, 3, 2};
  if (v.size() != want[static_cast<int>(kind)]) fail(ErrorCode::kInvalidArgument, "malformed PGC entry");
  ProcGenSpec s;
  switch (kind) {
    case ProcKind::kRandomUniform: s.params = RandomUniformParams{v[0], v[1]}; break;
    case ProcKind::kSlope: s.params = SlopeParams{v[0]}; break;
    case ProcKind::kDiscreteObstacles: s.params = DiscreteObstaclesParams{v[0], v[1], static_cast<int>(v[2])}; break;
    case ProcKind::kWave: s.params = WaveParams{static_cast<int>(v[0]), v[1]}; break;
  }
  return s;
}

}  // namespace

void save_checkpoint(const CurriculumState& state, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "terrains", ec);
  if (ec) fail(ErrorCode::kIoFailure, "cannot create " + (dir / "terrains").string());
  std::ostringstream out;
  out << "format=" << kStateFormat << "\n";
  out << "root_seed=" << state.root_seed << "\n";
  out << "epoch=" << state.epoch << "\n";
  out << "next_id=" << state.next_id << "\n";
  out << "reference_scale=" << fmt(state.reference_scale) << "\n";
  out << "stopped=" << (state.stopped ? 1 : 0) << "\n";
  out << "cem_iteration=" << state.policy.iteration << "\n";
  out << "cem_mean=" << join(state.policy.mean.weights) << "\n";
  out << "cem_sigma=" << join(state.policy.sigma) << "\n";
  out << "lambda_history=" << join(state.lambda_history) << "\n";
  out << "heldout_history=" << join(state.heldout_history) << "\n";
  for (const auto& f : state.pgc) {
    out << "pgc." << to_string(f.spec.kind()) << "=" << encode_pgc(f.spec) << "\n";
    out << "pgc_last." << to_string(f.spec.kind()) << "=" << (f.last_record ? std::to_string(*f.last_record) : "-")
        << "\n";
  }
  for (const auto& r : state.dataset) {
    out << "record=" << r.id << "," << to_string(r.origin) << "," << (r.success_rate ? fmt(*r.success_rate) : "-")
        << "," << r.last_eval_epoch << "\n";
    write_heightmap(r.map, dir / "terrains" / terrain_file(r.id));
  }
  std::ofstream file(dir / "state", std::ios::binary);
  if (!file) fail(ErrorCode::kIoFailure, "cannot write " + (dir / "state").string());
  file << out.str();
  if (!file) fail(ErrorCode::kIoFailure, "failed writing " + (dir / "state").string());
}

CurriculumState load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream file(dir / "state", std::ios::binary);
  if (!file) fail(ErrorCode::kIoFailure, "cannot open " + (dir / "state").string());
  CurriculumState state;
  state.pgc = initial_pgc_families();
  std::map<std::string, std::string> fields;
  std::string line;
  bool format_seen = false;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kInvalidArgument, "malformed state line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "format") {
      if (value != kStateFormat) fail(ErrorCode::kUnsupportedVersion, "unsupported state format '" + value + "'");
      format_seen = true;
    } else if (key == "record") {
      std::stringstream ss(value);
      std::string id, origin, rate, last;
      if (!std::getline(ss, id, ',') || !std::getline(ss, origin, ',') || !std::getline(ss, rate, ',') ||
          !std::getline(ss, last, ',')) {
        fail(ErrorCode::kTruncated, "record line is short");
      }
      TerrainRecord r{parse_u64(id), read_heightmap(dir / "terrains" / terrain_file(parse_u64(id))), std::nullopt,
                      static_cast<int>(std::stol(last)), parse_terrain_origin(origin)};
      if (rate != "-") r.success_rate = split_doubles(rate).at(0);
      state.dataset.push_back(std::move(r));
    } else if (key.rfind("pgc.", 0) == 0) {
      const auto kind = parse_proc_kind(key.substr(4));
      state.pgc[static_cast<std::size_t>(kind)].spec = decode_pgc(kind, value);
    } else if (key.rfind("pgc_last.", 0) == 0) {
      const auto kind = parse_proc_kind(key.substr(9));
      auto& last = state.pgc[static_cast<std::size_t>(kind)].last_record;
      if (value == "-") last.reset();
      else last = parse_u64(value);
    } else {
      fields[key] = value;
    }
  }
  if (!format_seen) fail(ErrorCode::kBadMagic, "state manifest lacks a format line");
  auto get = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) fail(ErrorCode::kTruncated, std::string("state manifest lacks '") + key + "'");
    return it->second;
  };
  state.root_seed = parse_u64(get("root_seed"));
  state.epoch = static_cast<int>(parse_u64(get("epoch")));
  state.next_id = parse_u64(get("next_id"));
  state.reference_scale = split_doubles(get("reference_scale")).at(0);
  state.stopped = get("stopped") == "1";
  state.policy.iteration = static_cast<int>(parse_u64(get("cem_iteration")));
  const auto mean = split_doubles(get("cem_mean"));
  const auto sigma = split_doubles(get("cem_sigma"));
  if (mean.size() != kParamCount || sigma.size() != kParamCount) {
    fail(ErrorCode::kDimensionMismatch, "policy vectors in state manifest have the wrong length");
  }
  std::copy(mean.begin(), mean.end(), state.policy.mean.weights.begin());
  std::copy(sigma.begin(), sigma.end(), state.policy.sigma.begin());
  state.lambda_history = split_doubles(get("lambda_history"));
  state.heldout_history = split_doubles(get("heldout_history"));
  return state;
}

}  // namespace adtg
