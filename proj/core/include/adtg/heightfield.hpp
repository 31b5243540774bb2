#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace adtg {

/// Row-major elevation grid. Cell (row, col) sits at x = col * resolution,
/// y = row * resolution. Immutable after construction.
class Heightmap {
 public:
  static constexpr int kMinSide = 4;

  /// Throws Error(kInvalidArgument) for bad dimensions or resolution and
  /// Error(kNonFinite) for NaN/Inf elevations.
  Heightmap(int width, int height, double resolution, std::vector<double> data);

  static Heightmap flat(int width, int height, double resolution, double value = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> data() const noexcept { return data_; }

  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }

  double extent_x() const noexcept { return (width_ - 1) * resolution_; }
  double extent_y() const noexcept { return (height_ - 1) * resolution_; }

  bool same_shape(const Heightmap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Field-wise equality; elevations compared bit-for-bit.
  bool bit_equal(const Heightmap& other) const noexcept;

 private:
  int width_;
  int height_;
  double resolution_;
  std::vector<double> data_;
};

struct TerrainStats {
  double mean = 0.0;
  double variance = 0.0;
  /// Mean gradient magnitude (rise over run) over interior cells.
  double roughness = 0.0;
  double min = 0.0;
  double max = 0.0;
};

TerrainStats compute_stats(const Heightmap& map);

/// Per-cell elevation gradient: central differences in the interior,
/// one-sided differences on the boundary.
struct GradientField {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  std::vector<double> gx;
  std::vector<double> gy;
};

GradientField compute_gradients(const Heightmap& map);

struct NormalizedMap {
  Heightmap map;
  double source_min;
  double source_max;
};

/// Affine rescale so the map minimum lands on lo and the maximum on hi.
/// A constant map lands on (lo + hi) / 2.
NormalizedMap normalize(const Heightmap& map, double lo, double hi);
Heightmap denormalize(const Heightmap& map, double lo, double hi, double source_min,
                      double source_max);

// "ADTG-HF v1" binary format, little-endian:
//   "ADTG" | u16 version | u32 width | u32 height | f64 resolution | f64[w*h]
inline constexpr std::uint16_t kHeightmapFormatVersion = 1;

std::vector<std::uint8_t> encode_heightmap(const Heightmap& map);
Heightmap decode_heightmap(std::span<const std::uint8_t> bytes);

void write_heightmap(const Heightmap& map, const std::filesystem::path& path);
Heightmap read_heightmap(const std::filesystem::path& path);

/// CSV export with header `row,col,elevation`.
void write_heightmap_csv(const Heightmap& map, const std::filesystem::path& path);

}  // namespace adtg
