#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "adtg/heightfield.hpp"

namespace adtg {

enum class TerrainOrigin { kSeed, kSynthesized, kProcedural };

const char* to_string(TerrainOrigin origin) noexcept;
TerrainOrigin parse_terrain_origin(const std::string& name);

/// A dataset entry: a terrain and the last success rate measured on it.
struct TerrainRecord {
  std::uint64_t id = 0;
  Heightmap map;
  std::optional<double> success_rate;
  int last_eval_epoch = -1;
  TerrainOrigin origin = TerrainOrigin::kSeed;

  bool measured() const noexcept { return success_rate.has_value(); }
};

}  // namespace adtg
