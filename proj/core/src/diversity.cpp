#include "adtg/diversity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "adtg/error.hpp"

namespace adtg {

namespace {

Eigen::MatrixXd centered_rows(std::span<const Heightmap> dataset) {
  if (dataset.size() < 2) fail(ErrorCode::kEmptyDataset, "variability needs at least 2 maps");
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const auto d = static_cast<Eigen::Index>(dataset.front().size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& map = dataset[static_cast<std::size_t>(i)];
    if (!map.same_shape(dataset.front())) fail(ErrorCode::kDimensionMismatch, "maps differ in shape");
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(map.data().data(), d);
  }
  x.rowwise() -= x.colwise().mean();
  return x;
}

}  // namespace

std::vector<double> principal_variances(std::span<const Heightmap> dataset, int m, PcaMethod method) {
  require(m >= 1, ErrorCode::kInvalidArgument, "component count must be positive");
  const Eigen::MatrixXd x = centered_rows(dataset);
  const double n = static_cast<double>(x.rows());
  if (method == PcaMethod::kAuto) method = x.rows() < x.cols() ? PcaMethod::kGram : PcaMethod::kCovariance;

  Eigen::MatrixXd s;
  if (method == PcaMethod::kGram) {
    s = (x * x.transpose()) / n;
  } else {
    s = (x.transpose() * x) / n;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::kNonFinite, "eigendecomposition failed");
  std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + s.rows());
  std::sort(values.begin(), values.end(), std::greater<>());
  values.resize(std::min<std::size_t>(values.size(), static_cast<std::size_t>(m)));
  for (auto& v : values) v = std::max(v, 0.0);
  return values;
}

double raw_variability(std::span<const Heightmap> dataset, int m, PcaMethod method) {
  const auto v = principal_variances(dataset, m, method);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

VariabilityReport assess_variability(std::span<const Heightmap> dataset, int m, double reference_scale,
                                     PcaMethod method) {
  require(reference_scale > 0.0 && std::isfinite(reference_scale), ErrorCode::kInvalidArgument,
          "reference scale must be positive");
  VariabilityReport report;
  report.m = m;
  report.reference_scale = reference_scale;
  report.raw_variance = raw_variability(dataset, m, method);
  report.lambda_var = std::clamp(report.raw_variance / reference_scale, 0.0, 1.0);
  return report;
}

int forward_step(double lambda_var, int steps) {
  require(steps >= 1, ErrorCode::kInvalidArgument, "step count must be positive");
  const double l = std::clamp(lambda_var, 0.0, 1.0);
  const auto k = static_cast<int>(std::lround(steps * (1.0 - l)));
  return std::clamp(k, 1, steps);
}

}  // namespace adtg
