#pragma once

#include "w2sd/gaussian_mixture.hpp"
#include "w2sd/rng.hpp"
#include "w2sd/schedule.hpp"
#include "w2sd/score_model.hpp"
#include "w2sd/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace w2sd {

struct TrainConfig {
  int hidden_layers = 2;
  int width = 64;
  double learning_rate = 1e-3;
  int batch_size = 256;
  int iterations = 20000;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Fully connected tanh network with a linear output layer.
class ScoreNetwork {
 public:
  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  ScoreNetwork() = default;
  ScoreNetwork(int inputs, int outputs, int hidden_layers, int width, Rng& init);

  int inputs() const { return layers_.front().weight.cols(); }
  int outputs() const { return layers_.back().weight.rows(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  Vector forward(const Vector& input) const;
  /// Column-wise forward pass over a batch (inputs x batch).
  Matrix forward(const Matrix& inputs) const;

  /// Flat parameter vector, layer by layer, weight (row-major) then bias.
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& flat);

  /// {"layers":[{"in":..,"out":..,"activation":..}],"params":[...]}
  nlohmann::json to_json() const;
  static ScoreNetwork from_json(const nlohmann::json& j);

 private:
  friend class NetworkTrainer;
  std::vector<Layer> layers_;
};

/// Score network wrapped as a model. Inputs are the preconditioned point
/// x / sqrt(v_data + V), the time t_k and V / (v_data + V); the output F is
/// mapped to the score F / sqrt(v_data + V).
class TrainedScoreModel final : public ScoreModel {
 public:
  TrainedScoreModel(ScoreNetwork network, double data_variance, NoiseSchedule schedule, std::string label,
                    nlohmann::json provenance, std::vector<double> loss_history = {});

  Vector score(const Vector& x, int k) const override;
  int dim() const override { return network_.outputs(); }
  const NoiseSchedule& schedule() const override { return schedule_; }
  const std::string& label() const override { return label_; }
  nlohmann::json provenance() const override { return provenance_; }

  const ScoreNetwork& network() const { return network_; }
  double data_variance() const { return data_variance_; }
  const std::vector<double>& loss_history() const { return loss_history_; }

  nlohmann::json to_json() const;
  static std::shared_ptr<const TrainedScoreModel> from_json(const nlohmann::json& j);

 private:
  ScoreNetwork network_;
  double data_variance_;
  NoiseSchedule schedule_;
  std::string label_;
  nlohmann::json provenance_;
  std::vector<double> loss_history_;
};

/// Builds the network input column for one point.
Vector network_input(const Vector& x, int k, const NoiseSchedule& schedule, double data_variance);

/// Fits a score network by denoising score matching on a fixed draw of
/// per_mode_counts[i] points from each mixture component.
///
/// Objective per sample (x0, k uniform in 1..T, z): || sqrt(V_k) * score(x0 + sqrt(V_k) z, k) + z ||^2,
/// i.e. the score-matching loss weighted by V_k. Throws TrainingDivergence on a
/// non-finite loss.
std::shared_ptr<const TrainedScoreModel> train_score_model(const GaussianMixture& data_mixture,
                                                           const std::vector<std::size_t>& per_mode_counts,
                                                           const TrainConfig& config, const NoiseSchedule& schedule,
                                                           std::uint64_t seed, std::string label = "trained");

}  // namespace w2sd
