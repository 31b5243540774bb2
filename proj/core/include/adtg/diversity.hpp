#pragma once

#include <span>
#include <vector>

#include "adtg/heightfield.hpp"

namespace adtg {

struct VariabilityReport {
  double lambda_var = 0.0;
  /// Sum of the top-m principal-component variances.
  double raw_variance = 0.0;
  int m = 0;
  double reference_scale = 1.0;
};

enum class PcaMethod {
  kAuto,        // Gram dual when n < D, covariance otherwise
  kCovariance,  // D x D covariance eigendecomposition
  kGram,        // n x n centered Gram matrix
};

/// Top-m principal-component variances, largest first. Variances use the
/// population normalization (divide by n). Throws Error(kEmptyDataset) for
/// fewer than 2 maps and Error(kDimensionMismatch) for mixed shapes.
std::vector<double> principal_variances(std::span<const Heightmap> dataset, int m,
                                        PcaMethod method = PcaMethod::kAuto);

/// Sum of the top-m principal variances.
double raw_variability(std::span<const Heightmap> dataset, int m, PcaMethod method = PcaMethod::kAuto);

/// lambda_var = clamp(raw / reference_scale, 0, 1).
VariabilityReport assess_variability(std::span<const Heightmap> dataset, int m, double reference_scale,
                                     PcaMethod method = PcaMethod::kAuto);

/// k = round(K (1 - lambda_var)) clamped to [1, K].
int forward_step(double lambda_var, int steps);

}  // namespace adtg
