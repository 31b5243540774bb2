#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "adtg/heightfield.hpp"
#include "adtg/rng.hpp"

namespace adtg {

// Parameter ranges of the procedural terrain families (meters unless noted).
namespace procgen_limits {
inline constexpr double kUniformHeightMin = -0.45;
inline constexpr double kUniformHeightMax = 0.45;
inline constexpr double kUniformStepMin = 0.005;
inline constexpr double kUniformStepMax = 0.045;
inline constexpr double kSlopeMin = 0.05;
inline constexpr double kSlopeMax = 0.86602540378443864676;  // sqrt(3) / 2
inline constexpr double kObstacleHeightMin = 0.4;
inline constexpr double kObstacleHeightMax = 10.0;
inline constexpr double kObstacleSizeMin = 0.1;
inline constexpr double kObstacleSizeMax = 2.0;
inline constexpr int kObstacleCountMin = 1;
inline constexpr int kObstacleCountMax = 20;
inline constexpr int kWaveCountMin = 1;
inline constexpr int kWaveCountMax = 20;
inline constexpr double kWaveAmplitudeMin = 0.1;
/// Upper amplitude bound couples to the wave count: amp <= 4 / count.
constexpr double wave_amplitude_max(int count) { return 4.0 / count; }
}  // namespace procgen_limits

/// Cells drawn i.i.d. on [-|height|, |height|], then clamped so 4-neighbour
/// differences never exceed `step`.
struct RandomUniformParams {
  double height = 0.1;
  double step = 0.01;
};

/// Plane rising at `grade` (rise/run) along a seeded direction.
struct SlopeParams {
  double grade = 0.1;
};

/// `count` square boxes with side `size`, height `height`, on flat ground.
struct DiscreteObstaclesParams {
  double height = 0.5;
  double size = 0.5;
  int count = 4;
};

/// Sum of `count` plane sinusoids of amplitude `amplitude`, one period across
/// the tile, seeded phases and directions.
struct WaveParams {
  int count = 2;
  double amplitude = 0.2;
};

enum class ProcKind { kRandomUniform, kSlope, kDiscreteObstacles, kWave };
inline constexpr int kProcKindCount = 4;

const char* to_string(ProcKind kind) noexcept;
ProcKind parse_proc_kind(const std::string& name);

struct ProcGenSpec {
  std::variant<RandomUniformParams, SlopeParams, DiscreteObstaclesParams, WaveParams> params;
  std::uint64_t seed = 0;

  ProcKind kind() const noexcept { return static_cast<ProcKind>(params.index()); }
};

/// Throws Error(kOutOfRange) naming the offending parameter.
void validate(const ProcGenSpec& spec);
bool within_limits(const ProcGenSpec& spec) noexcept;

Heightmap generate_procedural(const ProcGenSpec& spec, int width, int height, double resolution);

/// Uniform draw of every parameter within its range.
ProcGenSpec sample_procedural_spec(ProcKind kind, Rng& rng);
ProcGenSpec sample_procedural_spec(Rng& rng);

std::string describe(const ProcGenSpec& spec);

// ---------------------------------------------------------------------------
// Gaussian-mixture terrain prior.

struct Bump {
  double x = 0.0;  // meters
  double y = 0.0;
  double amplitude = 0.0;
  double sigma = 0.1;  // meters
};

Heightmap make_bump_map(int width, int height, double resolution, const std::vector<Bump>& bumps);

struct MixtureComponent {
  double weight;
  Heightmap mean;
  double sigma0;
};

class GaussianMixturePrior {
 public:
  /// Weights must sum to one (within 1e-9), shapes must match, sigma0 > 0.
  explicit GaussianMixturePrior(std::vector<MixtureComponent> components);

  const std::vector<MixtureComponent>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }
  int width() const noexcept { return components_.front().mean.width(); }
  int height() const noexcept { return components_.front().mean.height(); }
  double resolution() const noexcept { return components_.front().mean.resolution(); }

 private:
  std::vector<MixtureComponent> components_;
};

struct PriorSample {
  Heightmap map;
  std::size_t component;
};

PriorSample sample_prior_component(const GaussianMixturePrior& prior, Rng& rng);
Heightmap sample_prior(const GaussianMixturePrior& prior, Rng& rng);
Heightmap sample_prior(const GaussianMixturePrior& prior, std::uint64_t seed);

/// Prior whose components are `layouts` random bump layouts, each rendered at
/// `levels` amplitude scales spaced evenly on [amplitude_lo, amplitude_hi].
/// Level l has weight proportional to level_decay^l, so values below one make
/// rugged terrain rare.
struct BumpPriorConfig {
  int layouts = 4;
  int levels = 8;
  int bumps = 16;
  double bump_sigma_lo = 0.15;
  double bump_sigma_hi = 0.35;
  double amplitude_lo = 0.02;
  double amplitude_hi = 1.2;
  double sigma0 = 0.004;
  double level_decay = 1.0;
  std::uint64_t seed = 1;
};

GaussianMixturePrior make_bump_prior(const BumpPriorConfig& config, int width, int height,
                                     double resolution);

/// Random bump layout with unit amplitude scale (amplitudes on [0.5, 1],
/// random sign), used for priors and held-out terrain.
std::vector<Bump> random_bump_layout(int count, double extent_x, double extent_y, double sigma_lo,
                                     double sigma_hi, Rng& rng);

}  // namespace adtg
