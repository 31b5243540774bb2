#include "adtg/heightfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "adtg/binary_io.hpp"
#include "adtg/error.hpp"

namespace adtg {

Heightmap::Heightmap(int width, int height, double resolution, std::vector<double> data)
    : width_(width), height_(height), resolution_(resolution), data_(std::move(data)) {
  if (width_ < kMinSide || height_ < kMinSide) {
    fail(ErrorCode::kInvalidArgument, "heightmap sides must be >= 4, got " +
                                          std::to_string(width_) + "x" + std::to_string(height_));
  }
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    fail(ErrorCode::kInvalidArgument, "heightmap resolution must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    fail(ErrorCode::kDimensionMismatch, "heightmap data length != width * height");
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    fail(ErrorCode::kNonFinite, "heightmap contains NaN or Inf");
  }
}

Heightmap Heightmap::flat(int width, int height, double resolution, double value) {
  return Heightmap(width, height, resolution,
                   std::vector<double>(static_cast<std::size_t>(width) * height, value));
}

bool Heightmap::bit_equal(const Heightmap& other) const noexcept {
  if (width_ != other.width_ || height_ != other.height_) return false;
  if (std::bit_cast<std::uint64_t>(resolution_) != std::bit_cast<std::uint64_t>(other.resolution_)) {
    return false;
  }
  return std::equal(data_.begin(), data_.end(), other.data_.begin(), [](double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
  });
}

TerrainStats compute_stats(const Heightmap& map) {
  TerrainStats s;
  const auto data = map.data();
  double sum = 0.0;
  s.min = data[0];
  s.max = data[0];
  for (double v : data) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(data.size());
  double sq = 0.0;
  for (double v : data) sq += (v - s.mean) * (v - s.mean);
  s.variance = sq / static_cast<double>(data.size());
  // Rounding can push the mean a hair outside [min, max] for constant maps.
  s.mean = std::clamp(s.mean, s.min, s.max);

  const double inv2h = 1.0 / (2.0 * map.resolution());
  double rough = 0.0;
  for (int r = 1; r + 1 < map.height(); ++r) {
    for (int c = 1; c + 1 < map.width(); ++c) {
      const double gx = (map.at(r, c + 1) - map.at(r, c - 1)) * inv2h;
      const double gy = (map.at(r + 1, c) - map.at(r - 1, c)) * inv2h;
      rough += std::sqrt(gx * gx + gy * gy);
    }
  }
  s.roughness = rough / static_cast<double>((map.width() - 2) * (map.height() - 2));
  return s;
}

GradientField compute_gradients(const Heightmap& map) {
  GradientField g;
  g.width = map.width();
  g.height = map.height();
  g.resolution = map.resolution();
  g.gx.resize(map.size());
  g.gy.resize(map.size());
  const double h = map.resolution();
  const int w = map.width();
  const int ht = map.height();
  for (int r = 0; r < ht; ++r) {
    for (int c = 0; c < w; ++c) {
      double gx;
      if (c == 0) {
        gx = (map.at(r, 1) - map.at(r, 0)) / h;
      } else if (c == w - 1) {
        gx = (map.at(r, c) - map.at(r, c - 1)) / h;
      } else {
        gx = (map.at(r, c + 1) - map.at(r, c - 1)) / (2.0 * h);
      }
      double gy;
      if (r == 0) {
        gy = (map.at(1, c) - map.at(0, c)) / h;
      } else if (r == ht - 1) {
        gy = (map.at(r, c) - map.at(r - 1, c)) / h;
      } else {
        gy = (map.at(r + 1, c) - map.at(r - 1, c)) / (2.0 * h);
      }
      const auto i = static_cast<std::size_t>(r) * w + c;
      g.gx[i] = gx;
      g.gy[i] = gy;
    }
  }
  return g;
}

NormalizedMap normalize(const Heightmap& map, double lo, double hi) {
  require(lo < hi, ErrorCode::kInvalidArgument, "normalize requires lo < hi");
  const auto [mn_it, mx_it] = std::minmax_element(map.data().begin(), map.data().end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  std::vector<double> out(map.size());
  if (mx == mn) {
    std::fill(out.begin(), out.end(), 0.5 * (lo + hi));
  } else {
    const double scale = (hi - lo) / (mx - mn);
    std::transform(map.data().begin(), map.data().end(), out.begin(),
                   [&](double v) { return lo + (v - mn) * scale; });
  }
  return {Heightmap(map.width(), map.height(), map.resolution(), std::move(out)), mn, mx};
}

Heightmap denormalize(const Heightmap& map, double lo, double hi, double source_min,
                      double source_max) {
  require(lo < hi, ErrorCode::kInvalidArgument, "denormalize requires lo < hi");
  std::vector<double> out(map.size());
  const double scale = (source_max - source_min) / (hi - lo);
  std::transform(map.data().begin(), map.data().end(), out.begin(),
                 [&](double v) { return source_min + (v - lo) * scale; });
  return Heightmap(map.width(), map.height(), map.resolution(), std::move(out));
}

namespace {
constexpr std::uint8_t kMagic[4] = {0x41, 0x44, 0x54, 0x47};  // "ADTG"
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4 + 8;
}  // namespace

std::vector<std::uint8_t> encode_heightmap(const Heightmap& map) {
  binary::Writer w;
  w.bytes(kMagic);
  w.u16(kHeightmapFormatVersion);
  w.u32(static_cast<std::uint32_t>(map.width()));
  w.u32(static_cast<std::uint32_t>(map.height()));
  w.f64(map.resolution());
  for (double v : map.data()) w.f64(v);
  return w.take();
}

Heightmap decode_heightmap(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  if (!r.has(4) || !std::equal(std::begin(kMagic), std::end(kMagic), r.bytes(4).begin())) {
    fail(ErrorCode::kBadMagic, "not an ADTG-HF heightmap");
  }
  if (!r.has(kHeaderBytes - 4)) fail(ErrorCode::kTruncated, "heightmap header is incomplete");
  const auto version = r.u16();
  if (version != kHeightmapFormatVersion) {
    fail(ErrorCode::kUnsupportedVersion, "heightmap format version " + std::to_string(version));
  }
  const std::uint64_t width = r.u32();
  const std::uint64_t height = r.u32();
  const double resolution = r.f64();
  const std::uint64_t cells = width * height;
  if (cells > r.remaining() / 8) {
    fail(ErrorCode::kTruncated, "declared " + std::to_string(width) + "x" + std::to_string(height) +
                                    " grid exceeds remaining " + std::to_string(r.remaining()) +
                                    " bytes");
  }
  std::vector<double> data(cells);
  for (auto& v : data) {
    v = r.f64();
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "heightmap payload contains NaN or Inf");
  }
  return Heightmap(static_cast<int>(width), static_cast<int>(height), resolution, std::move(data));
}

void write_heightmap(const Heightmap& map, const std::filesystem::path& path) {
  binary::write_file(path, encode_heightmap(map));
}

Heightmap read_heightmap(const std::filesystem::path& path) {
  return decode_heightmap(binary::read_file(path));
}

void write_heightmap_csv(const Heightmap& map, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) fail(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::fputs("row,col,elevation\n", f.get());
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) std::fprintf(f.get(), "%d,%d,%.17g\n", r, c, map.at(r, c));
  }
  if (std::ferror(f.get())) fail(ErrorCode::kIoFailure, "write failed: " + path.string());
}

namespace binary {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIoFailure, "read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoFailure, "write failed: " + path.string());
}

}  // namespace binary
}  // namespace adtg
