#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "adtg/diffusion.hpp"

namespace adtg {

/// Sinusoidal embedding of a diffusion step, `dim` entries (dim even).
std::vector<double> step_embedding(int step, int dim);

/// Training minibatch: one column per example.
struct TrainingBatch {
  Eigen::MatrixXd latents;  // data_dim x B
  std::vector<int> steps;   // B
  Eigen::MatrixXd targets;  // data_dim x B
};

/// Two-hidden-layer tanh MLP: [latent ; step embedding] -> predicted noise.
class MlpNoisePredictor final : public NoisePredictor {
 public:
  struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
  };

  MlpNoisePredictor(int data_dim, int hidden, int embedding_dim, std::uint64_t seed);
  MlpNoisePredictor(std::array<Layer, 3> layers, int embedding_dim);

  std::vector<double> predict(const Latent& latent, const NoiseSchedule& schedule) const override;

  int data_dim() const noexcept { return static_cast<int>(layers_[2].weight.rows()); }
  int hidden() const noexcept { return static_cast<int>(layers_[0].weight.rows()); }
  int embedding_dim() const noexcept { return embedding_dim_; }
  const std::array<Layer, 3>& layers() const noexcept { return layers_; }

  /// Flat parameter view: per layer, weights row-major then bias.
  std::size_t parameter_count() const noexcept;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  /// Mean squared error over every cell of every example in the batch.
  double loss(const TrainingBatch& batch) const;
  /// Same loss; `gradient` receives d loss / d parameters in flat order.
  double loss_and_gradient(const TrainingBatch& batch, std::vector<double>& gradient) const;

  std::vector<std::uint8_t> encode() const;
  static MlpNoisePredictor decode(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static MlpNoisePredictor load(const std::filesystem::path& path);

 private:
  Eigen::MatrixXd inputs_for(const Eigen::MatrixXd& latents, const std::vector<int>& steps) const;

  std::array<Layer, 3> layers_;
  int embedding_dim_;
};

struct PredictorTrainingConfig {
  int hidden = 64;
  int embedding_dim = 16;
  double learning_rate = 0.02;
  double momentum = 0.9;
  int batch_size = 16;
  int steps = 2000;
};

struct TrainedPredictor {
  MlpNoisePredictor model;
  std::vector<double> loss_history;  // minibatch loss before each update
};

/// Minibatch SGD (with momentum) on the noise-prediction MSE, corrupting maps
/// with the closed-form forward marginal at uniformly drawn k in [1, K].
TrainedPredictor train_predictor(std::span<const Heightmap> dataset, const NoiseSchedule& schedule,
                                 const PredictorTrainingConfig& config, std::uint64_t seed);

/// Draws a corruption batch the same way training does.
TrainingBatch sample_training_batch(std::span<const Heightmap> dataset, const NoiseSchedule& schedule,
                                    int batch_size, Rng& rng);

}  // namespace adtg
