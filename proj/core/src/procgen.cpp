#include "adtg/procgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "adtg/error.hpp"

namespace adtg {

namespace lim = procgen_limits;

const char* to_string(ProcKind kind) noexcept {
  switch (kind) {
    case ProcKind::kRandomUniform: return "random_uniform";
    case ProcKind::kSlope: return "slope";
    case ProcKind::kDiscreteObstacles: return "discrete_obstacles";
    case ProcKind::kWave: return "wave";
  }
  return "?";
}

ProcKind parse_proc_kind(const std::string& name) {
  for (int i = 0; i < kProcKindCount; ++i) {
    if (name == to_string(static_cast<ProcKind>(i))) return static_cast<ProcKind>(i);
  }
  fail(ErrorCode::kInvalidArgument, "unknown procedural kind '" + name + "'");
}

namespace {

void check(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kOutOfRange, what);
}

void check_range(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << what << " = " << v << " outside [" << lo << ", " << hi << "]";
    fail(ErrorCode::kOutOfRange, os.str());
  }
}

// Largest step-Lipschitz function (4-neighbour metric) below / above `v`,
// computed by forward and backward chamfer sweeps repeated until nothing moves.
std::vector<double> lipschitz_envelope(std::vector<double> v, int w, int h, double step, bool lower) {
  const double sgn = lower ? 1.0 : -1.0;
  auto relax = [&](std::size_t i, std::size_t j, bool& changed) {
    // lower: v[i] = min(v[i], v[j] + step); upper: v[i] = max(v[i], v[j] - step)
    const double bound = v[j] + sgn * step;
    if (sgn * (v[i] - bound) > 0.0) {
      v[i] = bound;
      changed = true;
    }
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const auto i = static_cast<std::size_t>(r) * w + c;
        if (c > 0) relax(i, i - 1, changed);
        if (r > 0) relax(i, i - w, changed);
      }
    }
    for (int r = h - 1; r >= 0; --r) {
      for (int c = w - 1; c >= 0; --c) {
        const auto i = static_cast<std::size_t>(r) * w + c;
        if (c + 1 < w) relax(i, i + 1, changed);
        if (r + 1 < h) relax(i, i + w, changed);
      }
    }
  }
  return v;
}

Heightmap random_uniform(const RandomUniformParams& p, Rng& rng, int w, int h, double res) {
  const double amp = std::abs(p.height);
  std::vector<double> cells(static_cast<std::size_t>(w) * h);
  for (auto& v : cells) v = rng.uniform(-amp, amp);
  // The mean of the two envelopes is still step-Lipschitz and stays centred.
  const auto lower = lipschitz_envelope(cells, w, h, p.step, true);
  const auto upper = lipschitz_envelope(cells, w, h, p.step, false);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = 0.5 * (lower[i] + upper[i]);
  return Heightmap(w, h, res, std::move(cells));
}

Heightmap slope(const SlopeParams& p, Rng& rng, int w, int h, double res) {
  const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double cx = std::cos(theta);
  const double cy = std::sin(theta);
  std::vector<double> cells(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      cells[static_cast<std::size_t>(r) * w + c] = p.grade * (c * res * cx + r * res * cy);
    }
  }
  return Heightmap(w, h, res, std::move(cells));
}

Heightmap obstacles(const DiscreteObstaclesParams& p, Rng& rng, int w, int h, double res) {
  std::vector<double> cells(static_cast<std::size_t>(w) * h, 0.0);
  const double ex = (w - 1) * res;
  const double ey = (h - 1) * res;
  for (int i = 0; i < p.count; ++i) {
    const double x0 = rng.uniform(0.0, ex);
    const double y0 = rng.uniform(0.0, ey);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double x = c * res;
        const double y = r * res;
        if (std::abs(x - x0) <= 0.5 * p.size && std::abs(y - y0) <= 0.5 * p.size) {
          auto& v = cells[static_cast<std::size_t>(r) * w + c];
          v = std::max(v, p.height);
        }
      }
    }
  }
  return Heightmap(w, h, res, std::move(cells));
}

Heightmap wave(const WaveParams& p, Rng& rng, int w, int h, double res) {
  const double wavelength = std::max(w, h) * res;
  const double k = 2.0 * std::numbers::pi / wavelength;
  std::vector<double> cells(static_cast<std::size_t>(w) * h, 0.0);
  for (int i = 0; i < p.count; ++i) {
    const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double kx = k * std::cos(theta);
    const double ky = k * std::sin(theta);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        cells[static_cast<std::size_t>(r) * w + c] +=
            p.amplitude * std::sin(kx * c * res + ky * r * res + phase);
      }
    }
  }
  return Heightmap(w, h, res, std::move(cells));
}

}  // namespace

void validate(const ProcGenSpec& spec) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RandomUniformParams>) {
          check_range(p.height, lim::kUniformHeightMin, lim::kUniformHeightMax, "random_uniform.height");
          check_range(p.step, lim::kUniformStepMin, lim::kUniformStepMax, "random_uniform.step");
        } else if constexpr (std::is_same_v<T, SlopeParams>) {
          check_range(p.grade, lim::kSlopeMin, lim::kSlopeMax, "slope.grade");
        } else if constexpr (std::is_same_v<T, DiscreteObstaclesParams>) {
          check_range(p.height, lim::kObstacleHeightMin, lim::kObstacleHeightMax,
                      "discrete_obstacles.height");
          check_range(p.size, lim::kObstacleSizeMin, lim::kObstacleSizeMax, "discrete_obstacles.size");
          check(p.count >= lim::kObstacleCountMin && p.count <= lim::kObstacleCountMax,
                "discrete_obstacles.count outside [1, 20]");
        } else {
          check(p.count >= lim::kWaveCountMin && p.count <= lim::kWaveCountMax,
                "wave.count outside [1, 20]");
          check_range(p.amplitude, lim::kWaveAmplitudeMin, lim::wave_amplitude_max(p.count),
                      "wave.amplitude");
        }
      },
      spec.params);
}

bool within_limits(const ProcGenSpec& spec) noexcept {
  try {
    validate(spec);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Heightmap generate_procedural(const ProcGenSpec& spec, int width, int height, double resolution) {
  validate(spec);
  Rng rng(derive_seed(spec.seed, "procgen", static_cast<std::uint64_t>(spec.kind())));
  return std::visit(
      [&](const auto& p) -> Heightmap {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RandomUniformParams>) {
          return random_uniform(p, rng, width, height, resolution);
        } else if constexpr (std::is_same_v<T, SlopeParams>) {
          return slope(p, rng, width, height, resolution);
        } else if constexpr (std::is_same_v<T, DiscreteObstaclesParams>) {
          return obstacles(p, rng, width, height, resolution);
        } else {
          return wave(p, rng, width, height, resolution);
        }
      },
      spec.params);
}

ProcGenSpec sample_procedural_spec(ProcKind kind, Rng& rng) {
  ProcGenSpec spec;
  spec.seed = rng.next_u64();
  switch (kind) {
    case ProcKind::kRandomUniform:
      spec.params = RandomUniformParams{rng.uniform(lim::kUniformHeightMin, lim::kUniformHeightMax),
                                        rng.uniform(lim::kUniformStepMin, lim::kUniformStepMax)};
      break;
    case ProcKind::kSlope:
      spec.params = SlopeParams{rng.uniform(lim::kSlopeMin, lim::kSlopeMax)};
      break;
    case ProcKind::kDiscreteObstacles: {
      const double h = rng.uniform(lim::kObstacleHeightMin, lim::kObstacleHeightMax);
      const double s = rng.uniform(lim::kObstacleSizeMin, lim::kObstacleSizeMax);
      const int n = lim::kObstacleCountMin +
                    static_cast<int>(rng.uniform_index(lim::kObstacleCountMax - lim::kObstacleCountMin + 1));
      spec.params = DiscreteObstaclesParams{h, s, n};
      break;
    }
    case ProcKind::kWave: {
      const int n = lim::kWaveCountMin +
                    static_cast<int>(rng.uniform_index(lim::kWaveCountMax - lim::kWaveCountMin + 1));
      spec.params = WaveParams{n, rng.uniform(lim::kWaveAmplitudeMin, lim::wave_amplitude_max(n))};
      break;
    }
  }
  return spec;
}

ProcGenSpec sample_procedural_spec(Rng& rng) {
  const auto kind = static_cast<ProcKind>(rng.uniform_index(kProcKindCount));
  return sample_procedural_spec(kind, rng);
}

std::string describe(const ProcGenSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.kind());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RandomUniformParams>) {
          os << " height=" << p.height << " step=" << p.step;
        } else if constexpr (std::is_same_v<T, SlopeParams>) {
          os << " grade=" << p.grade;
        } else if constexpr (std::is_same_v<T, DiscreteObstaclesParams>) {
          os << " height=" << p.height << " size=" << p.size << " count=" << p.count;
        } else {
          os << " count=" << p.count << " amplitude=" << p.amplitude;
        }
      },
      spec.params);
  os << " seed=" << spec.seed;
  return os.str();
}

Heightmap make_bump_map(int width, int height, double resolution, const std::vector<Bump>& bumps) {
  std::vector<double> cells(static_cast<std::size_t>(width) * height, 0.0);
  for (const auto& b : bumps) {
    const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
    for (int r = 0; r < height; ++r) {
      const double dy = r * resolution - b.y;
      for (int c = 0; c < width; ++c) {
        const double dx = c * resolution - b.x;
        cells[static_cast<std::size_t>(r) * width + c] += b.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return Heightmap(width, height, resolution, std::move(cells));
}

GaussianMixturePrior::GaussianMixturePrior(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), ErrorCode::kInvalidArgument, "mixture prior needs a component");
  double total = 0.0;
  for (const auto& c : components_) {
    require(c.weight > 0.0 && c.weight <= 1.0, ErrorCode::kInvalidArgument,
            "mixture weights must lie in (0, 1]");
    require(c.sigma0 > 0.0 && std::isfinite(c.sigma0), ErrorCode::kInvalidArgument,
            "mixture sigma0 must be positive");
    require(c.mean.same_shape(components_.front().mean), ErrorCode::kDimensionMismatch,
            "mixture component shapes differ");
    total += c.weight;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::kInvalidArgument, "mixture weights must sum to 1");
}

PriorSample sample_prior_component(const GaussianMixturePrior& prior, Rng& rng) {
  const auto& comps = prior.components();
  const double u = rng.uniform();
  std::size_t j = 0;
  double acc = 0.0;
  for (; j + 1 < comps.size(); ++j) {
    acc += comps[j].weight;
    if (u < acc) break;
  }
  const auto& c = comps[j];
  std::vector<double> cells(c.mean.data().begin(), c.mean.data().end());
  for (auto& v : cells) v += c.sigma0 * rng.normal();
  return {Heightmap(c.mean.width(), c.mean.height(), c.mean.resolution(), std::move(cells)), j};
}

Heightmap sample_prior(const GaussianMixturePrior& prior, Rng& rng) {
  return sample_prior_component(prior, rng).map;
}

Heightmap sample_prior(const GaussianMixturePrior& prior, std::uint64_t seed) {
  Rng rng(seed);
  return sample_prior(prior, rng);
}

std::vector<Bump> random_bump_layout(int count, double extent_x, double extent_y, double sigma_lo,
                                     double sigma_hi, Rng& rng) {
  std::vector<Bump> bumps(static_cast<std::size_t>(count));
  for (auto& b : bumps) {
    b.x = rng.uniform(0.0, extent_x);
    b.y = rng.uniform(0.0, extent_y);
    b.sigma = rng.uniform(sigma_lo, sigma_hi);
    b.amplitude = rng.uniform(0.5, 1.0) * (rng.uniform() < 0.75 ? 1.0 : -1.0);
  }
  return bumps;
}

GaussianMixturePrior make_bump_prior(const BumpPriorConfig& config, int width, int height,
                                     double resolution) {
  require(config.layouts >= 1 && config.levels >= 1 && config.bumps >= 0,
          ErrorCode::kInvalidArgument, "bump prior needs layouts >= 1 and levels >= 1");
  Rng rng(derive_seed(config.seed, "bump-prior"));
  const double ex = (width - 1) * resolution;
  const double ey = (height - 1) * resolution;
  require(config.level_decay > 0.0, ErrorCode::kInvalidArgument, "level_decay must be positive");
  std::vector<MixtureComponent> comps;
  for (int l = 0; l < config.layouts; ++l) {
    const auto layout =
        random_bump_layout(config.bumps, ex, ey, config.bump_sigma_lo, config.bump_sigma_hi, rng);
    for (int a = 0; a < config.levels; ++a) {
      const double t = config.levels == 1 ? 1.0 : static_cast<double>(a) / (config.levels - 1);
      const double scale = config.amplitude_lo + t * (config.amplitude_hi - config.amplitude_lo);
      auto scaled = layout;
      for (auto& b : scaled) b.amplitude *= scale;
      comps.push_back({std::pow(config.level_decay, a), make_bump_map(width, height, resolution, scaled), config.sigma0});
    }
  }
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return GaussianMixturePrior(std::move(comps));
}

}  // namespace adtg
