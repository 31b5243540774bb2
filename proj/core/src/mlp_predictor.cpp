#include "adtg/mlp_predictor.hpp"

#include <cmath>
#include <cstring>
#include <string_view>

#include "adtg/binary_io.hpp"
#include "adtg/error.hpp"

namespace adtg {
namespace {

constexpr std::string_view kMagic = "ADTG-NP v1";

Eigen::MatrixXd tanh_of(const Eigen::MatrixXd& z) { return z.array().tanh().matrix(); }

}  // namespace

std::vector<double> step_embedding(int step, int dim) {
  std::vector<double> out(static_cast<std::size_t>(dim));
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / std::max(half, 1));
    out[static_cast<std::size_t>(2 * i)] = std::sin(step * freq);
    out[static_cast<std::size_t>(2 * i + 1)] = std::cos(step * freq);
  }
  return out;
}

MlpNoisePredictor::MlpNoisePredictor(int data_dim, int hidden, int embedding_dim, std::uint64_t seed)
    : embedding_dim_(embedding_dim) {
  require(data_dim > 0 && hidden > 0 && embedding_dim >= 0 && embedding_dim % 2 == 0,
          ErrorCode::kInvalidArgument, "bad MLP dimensions");
  Rng rng(seed);
  const std::array<std::pair<int, int>, 3> shapes{
      {{hidden, data_dim + embedding_dim}, {hidden, hidden}, {data_dim, hidden}}};
  for (std::size_t l = 0; l < 3; ++l) {
    const auto [out, in] = shapes[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    layers_[l].weight.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layers_[l].weight(r, c) = scale * rng.normal();
    }
    layers_[l].bias = Eigen::VectorXd::Zero(out);
  }
}

MlpNoisePredictor::MlpNoisePredictor(std::array<Layer, 3> layers, int embedding_dim)
    : layers_(std::move(layers)), embedding_dim_(embedding_dim) {
  const auto data_dim = layers_[2].weight.rows();
  require(layers_[0].weight.cols() == data_dim + embedding_dim &&
              layers_[1].weight.cols() == layers_[0].weight.rows() &&
              layers_[2].weight.cols() == layers_[1].weight.rows(),
          ErrorCode::kDimensionMismatch, "MLP layer shapes do not chain");
  for (const auto& l : layers_) {
    require(l.bias.size() == l.weight.rows(), ErrorCode::kDimensionMismatch, "MLP bias size");
  }
}

Eigen::MatrixXd MlpNoisePredictor::inputs_for(const Eigen::MatrixXd& latents,
                                              const std::vector<int>& steps) const {
  Eigen::MatrixXd x(latents.rows() + embedding_dim_, latents.cols());
  x.topRows(latents.rows()) = latents;
  for (Eigen::Index b = 0; b < latents.cols(); ++b) {
    const auto emb = step_embedding(steps[static_cast<std::size_t>(b)], embedding_dim_);
    for (int i = 0; i < embedding_dim_; ++i) x(latents.rows() + i, b) = emb[static_cast<std::size_t>(i)];
  }
  return x;
}

std::vector<double> MlpNoisePredictor::predict(const Latent& latent, const NoiseSchedule&) const {
  require(static_cast<int>(latent.values.size()) == data_dim(), ErrorCode::kDimensionMismatch,
          "latent size differs from predictor input size");
  const Eigen::Map<const Eigen::VectorXd> v(latent.values.data(), data_dim());
  const Eigen::MatrixXd x = inputs_for(v, {latent.step});
  const Eigen::VectorXd h1 = (layers_[0].weight * x).col(0) + layers_[0].bias;
  const Eigen::VectorXd a1 = h1.array().tanh();
  const Eigen::VectorXd a2 = (layers_[1].weight * a1 + layers_[1].bias).array().tanh();
  const Eigen::VectorXd out = layers_[2].weight * a2 + layers_[2].bias;
  return {out.data(), out.data() + out.size()};
}

std::size_t MlpNoisePredictor::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> MlpNoisePredictor::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

void MlpNoisePredictor::set_parameters(std::span<const double> flat) {
  require(flat.size() == parameter_count(), ErrorCode::kDimensionMismatch, "parameter count");
  std::size_t i = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[i++];
  }
}

double MlpNoisePredictor::loss(const TrainingBatch& batch) const {
  const Eigen::MatrixXd x = inputs_for(batch.latents, batch.steps);
  Eigen::MatrixXd a1 = tanh_of((layers_[0].weight * x).colwise() + layers_[0].bias);
  Eigen::MatrixXd a2 = tanh_of((layers_[1].weight * a1).colwise() + layers_[1].bias);
  Eigen::MatrixXd out = (layers_[2].weight * a2).colwise() + layers_[2].bias;
  return (out - batch.targets).squaredNorm() / static_cast<double>(out.size());
}

double MlpNoisePredictor::loss_and_gradient(const TrainingBatch& batch,
                                            std::vector<double>& gradient) const {
  const Eigen::MatrixXd x = inputs_for(batch.latents, batch.steps);
  const Eigen::MatrixXd a1 = tanh_of((layers_[0].weight * x).colwise() + layers_[0].bias);
  const Eigen::MatrixXd a2 = tanh_of((layers_[1].weight * a1).colwise() + layers_[1].bias);
  const Eigen::MatrixXd out = (layers_[2].weight * a2).colwise() + layers_[2].bias;
  const Eigen::MatrixXd diff = out - batch.targets;
  const double n = static_cast<double>(out.size());

  const Eigen::MatrixXd d_out = (2.0 / n) * diff;
  const Eigen::MatrixXd d_a2 = layers_[2].weight.transpose() * d_out;
  const Eigen::MatrixXd d_z2 = d_a2.array() * (1.0 - a2.array().square());
  const Eigen::MatrixXd d_a1 = layers_[1].weight.transpose() * d_z2;
  const Eigen::MatrixXd d_z1 = d_a1.array() * (1.0 - a1.array().square());

  const std::array<Eigen::MatrixXd, 3> d_w{d_z1 * x.transpose(), d_z2 * a1.transpose(),
                                           d_out * a2.transpose()};
  const std::array<Eigen::VectorXd, 3> d_b{d_z1.rowwise().sum(), d_z2.rowwise().sum(),
                                           d_out.rowwise().sum()};
  gradient.clear();
  gradient.reserve(parameter_count());
  for (std::size_t l = 0; l < 3; ++l) {
    for (Eigen::Index r = 0; r < d_w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < d_w[l].cols(); ++c) gradient.push_back(d_w[l](r, c));
    }
    for (Eigen::Index r = 0; r < d_b[l].size(); ++r) gradient.push_back(d_b[l](r));
  }
  return diff.squaredNorm() / n;
}

std::vector<std::uint8_t> MlpNoisePredictor::encode() const {
  binary::Writer w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic.data()), kMagic.size()});
  w.u32(static_cast<std::uint32_t>(layers_.size()));
  for (const auto& l : layers_) {
    w.u32(static_cast<std::uint32_t>(l.weight.rows()));
    w.u32(static_cast<std::uint32_t>(l.weight.cols()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias(r));
  }
  return w.take();
}

MlpNoisePredictor MlpNoisePredictor::decode(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  if (!r.has(kMagic.size()) ||
      std::memcmp(r.bytes(kMagic.size()).data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::kBadMagic, "not an ADTG-NP v1 predictor blob");
  }
  if (!r.has(4)) fail(ErrorCode::kTruncated, "predictor blob missing layer count");
  const auto count = r.u32();
  if (count != 3) fail(ErrorCode::kUnsupportedVersion, "expected 3 layers, got " + std::to_string(count));
  std::array<Layer, 3> layers;
  for (auto& l : layers) {
    if (!r.has(8)) fail(ErrorCode::kTruncated, "predictor blob missing layer dims");
    const std::uint64_t rows = r.u32();
    const std::uint64_t cols = r.u32();
    if (rows * cols + rows > r.remaining() / 8) fail(ErrorCode::kTruncated, "predictor blob truncated");
    l.weight.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    l.bias.resize(static_cast<Eigen::Index>(rows));
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = r.f64();
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = r.f64();
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      fail(ErrorCode::kNonFinite, "predictor blob contains NaN or Inf");
    }
  }
  const auto embedding = layers[0].weight.cols() - layers[2].weight.rows();
  require(embedding >= 0 && embedding % 2 == 0, ErrorCode::kDimensionMismatch,
          "predictor blob has inconsistent layer shapes");
  return MlpNoisePredictor(std::move(layers), static_cast<int>(embedding));
}

void MlpNoisePredictor::save(const std::filesystem::path& path) const { binary::write_file(path, encode()); }

MlpNoisePredictor MlpNoisePredictor::load(const std::filesystem::path& path) {
  return decode(binary::read_file(path));
}

TrainingBatch sample_training_batch(std::span<const Heightmap> dataset, const NoiseSchedule& schedule,
                                    int batch_size, Rng& rng) {
  const auto dim = static_cast<Eigen::Index>(dataset.front().size());
  TrainingBatch batch{Eigen::MatrixXd(dim, batch_size), std::vector<int>(static_cast<std::size_t>(batch_size)),
                      Eigen::MatrixXd(dim, batch_size)};
  for (int b = 0; b < batch_size; ++b) {
    const auto& map = dataset[rng.uniform_index(dataset.size())];
    const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(schedule.steps())));
    const double a = std::sqrt(schedule.alpha_bar(k));
    const double s = std::sqrt(1.0 - schedule.alpha_bar(k));
    batch.steps[static_cast<std::size_t>(b)] = k;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double eps = rng.normal();
      batch.targets(i, b) = eps;
      batch.latents(i, b) = a * map.data()[static_cast<std::size_t>(i)] + s * eps;
    }
  }
  return batch;
}

TrainedPredictor train_predictor(std::span<const Heightmap> dataset, const NoiseSchedule& schedule,
                                 const PredictorTrainingConfig& config, std::uint64_t seed) {
  if (dataset.empty()) fail(ErrorCode::kEmptyDataset, "cannot train a predictor on an empty dataset");
  for (const auto& m : dataset) {
    require(m.same_shape(dataset.front()), ErrorCode::kDimensionMismatch,
            "training maps must share dimensions");
  }
  require(config.batch_size > 0 && config.steps >= 0 && config.learning_rate > 0.0,
          ErrorCode::kInvalidArgument, "bad predictor training config");

  TrainedPredictor result{MlpNoisePredictor(static_cast<int>(dataset.front().size()), config.hidden,
                                            config.embedding_dim, derive_seed(seed, "mlp-init")),
                          {}};
  Rng rng(derive_seed(seed, "mlp-batches"));
  auto params = result.model.parameters();
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> grad;
  result.loss_history.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    const auto batch = sample_training_batch(dataset, schedule, config.batch_size, rng);
    result.loss_history.push_back(result.model.loss_and_gradient(batch, grad));
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i] = config.momentum * velocity[i] - config.learning_rate * grad[i];
      params[i] += velocity[i];
    }
    result.model.set_parameters(params);
  }
  return result;
}

}  // namespace adtg
