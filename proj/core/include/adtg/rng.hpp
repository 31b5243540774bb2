#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace adtg {

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the real-valued conversions are done here rather
/// than through <random> distributions so that draws do not depend on the
/// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer on [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal (Box-Muller, spare value cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent stream seed from a root seed, a stream name and up
/// to three indices. Streams are counter-based: the seed for (name, i, j)
/// never depends on how many other streams were created before it.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t i = 0,
                          std::uint64_t j = 0, std::uint64_t l = 0);

inline Rng make_stream(std::uint64_t root, std::string_view stream, std::uint64_t i = 0,
                       std::uint64_t j = 0, std::uint64_t l = 0) {
  return Rng(derive_seed(root, stream, i, j, l));
}

}  // namespace adtg
