#include "w2sd/score_network.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace w2sd {

nlohmann::json TrainConfig::to_json() const {
  return {{"hidden_layers", hidden_layers}, {"width", width},           {"learning_rate", learning_rate},
          {"batch_size", batch_size},       {"iterations", iterations}, {"activation", "tanh"},
          {"optimizer", "adam"}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "activation" && value == "tanh") continue;
    if (key == "optimizer" && value == "adam") continue;
    if (key != "hidden_layers" && key != "width" && key != "learning_rate" && key != "batch_size" &&
        key != "iterations") {
      throw std::invalid_argument("train config: unsupported field '" + key + "'");
    }
  }
  TrainConfig c;
  c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
  c.width = j.value("width", c.width);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.iterations = j.value("iterations", c.iterations);
  if (c.hidden_layers < 1 || c.width < 1 || c.batch_size < 1 || c.iterations < 1 || !(c.learning_rate > 0.0)) {
    throw std::invalid_argument("train config: sizes, iterations and learning rate must be positive");
  }
  return c;
}

ScoreNetwork::ScoreNetwork(int inputs, int outputs, int hidden_layers, int width, Rng& init) {
  int fan_in = inputs;
  for (int l = 0; l <= hidden_layers; ++l) {
    const int fan_out = l == hidden_layers ? outputs : width;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Layer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = (2.0 * init.uniform() - 1.0) * limit;
    }
    layers_.push_back(std::move(layer));
    fan_in = fan_out;
  }
}

std::size_t ScoreNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector ScoreNetwork::forward(const Vector& input) const {
  Vector h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector a = layers_[l].weight * h + layers_[l].bias;
    h = l + 1 < layers_.size() ? Vector(a.array().tanh()) : a;
  }
  return h;
}

Matrix ScoreNetwork::forward(const Matrix& inputs) const {
  Matrix h = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix a = (layers_[l].weight * h).colwise() + layers_[l].bias;
    h = l + 1 < layers_.size() ? Matrix(a.array().tanh()) : a;
  }
  return h;
}

std::vector<double> ScoreNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (int r = 0; r < l.weight.rows(); ++r) {
      for (int c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (int r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias[r]);
  }
  return flat;
}

void ScoreNetwork::set_parameters(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("parameter vector has the wrong length");
  std::size_t i = 0;
  for (auto& l : layers_) {
    for (int r = 0; r < l.weight.rows(); ++r) {
      for (int c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[i++];
    }
    for (int r = 0; r < l.bias.size(); ++r) l.bias[r] = flat[i++];
  }
}

nlohmann::json ScoreNetwork::to_json() const {
  nlohmann::json shapes = nlohmann::json::array();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    shapes.push_back({{"in", layers_[l].weight.cols()},
                      {"out", layers_[l].weight.rows()},
                      {"activation", l + 1 < layers_.size() ? "tanh" : "linear"}});
  }
  return {{"layers", shapes}, {"params", parameters()}};
}

ScoreNetwork ScoreNetwork::from_json(const nlohmann::json& j) {
  ScoreNetwork net;
  for (const auto& shape : j.at("layers")) {
    const int in = shape.at("in").get<int>();
    const int out = shape.at("out").get<int>();
    if (in < 1 || out < 1) throw std::invalid_argument("network layer sizes must be positive");
    if (!net.layers_.empty() && net.layers_.back().weight.rows() != in) {
      throw std::invalid_argument("network layer shapes do not chain");
    }
    net.layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  }
  if (net.layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  net.set_parameters(j.at("params").get<std::vector<double>>());
  return net;
}

Vector network_input(const Vector& x, int k, const NoiseSchedule& schedule, double data_variance) {
  const double v = schedule.accumulated_variance(k);
  const double total = data_variance + v;
  Vector in(x.size() + 2);
  in.head(x.size()) = x / std::sqrt(total);
  in[x.size()] = schedule.time(k);
  in[x.size() + 1] = v / total;
  return in;
}

TrainedScoreModel::TrainedScoreModel(ScoreNetwork network, double data_variance, NoiseSchedule schedule,
                                     std::string label, nlohmann::json provenance, std::vector<double> loss_history)
    : network_(std::move(network)),
      data_variance_(data_variance),
      schedule_(std::move(schedule)),
      label_(std::move(label)),
      provenance_(std::move(provenance)),
      loss_history_(std::move(loss_history)) {
  if (!(data_variance_ > 0.0)) throw std::invalid_argument("trained model: data variance must be positive");
  if (network_.inputs() != network_.outputs() + 2) throw std::invalid_argument("trained model: input width must be dim + 2");
}

Vector TrainedScoreModel::score(const Vector& x, int k) const {
  if (x.size() != dim()) throw std::invalid_argument("score: point dimension mismatch");
  const double scale = std::sqrt(data_variance_ + schedule_.accumulated_variance(k));
  Vector out = network_.forward(network_input(x, k, schedule_, data_variance_)) / scale;
  if (!out.allFinite()) throw NumericalError("network score is not finite");
  return out;
}

nlohmann::json TrainedScoreModel::to_json() const {
  return {{"label", label_},
          {"data_variance", data_variance_},
          {"schedule", schedule_.to_json()},
          {"network", network_.to_json()},
          {"provenance", provenance_}};
}

std::shared_ptr<const TrainedScoreModel> TrainedScoreModel::from_json(const nlohmann::json& j) {
  return std::make_shared<const TrainedScoreModel>(ScoreNetwork::from_json(j.at("network")),
                                                   j.at("data_variance").get<double>(),
                                                   NoiseSchedule::from_json(j.at("schedule")),
                                                   j.value("label", std::string("trained")), j.value("provenance", nlohmann::json::object()));
}

namespace {

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;
};

}  // namespace

class NetworkTrainer {
 public:
  NetworkTrainer(ScoreNetwork& net, double learning_rate) : net_(net), lr_(learning_rate) {
    for (const auto& l : net_.layers_) {
      adam_.m_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      adam_.v_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      adam_.m_b.push_back(Vector::Zero(l.bias.size()));
      adam_.v_b.push_back(Vector::Zero(l.bias.size()));
    }
  }

  // One Adam step on the mean of ||coef .* F + z||^2 over the batch, where
  // coef[b] = sqrt(V_b) / sqrt(v_data + V_b). Returns the batch loss.
  double step(const Matrix& inputs, const Vector& coef, const Matrix& noise) {
    const std::size_t n_layers = net_.layers_.size();
    const auto batch = static_cast<double>(inputs.cols());
    std::vector<Matrix> activations{inputs};
    for (std::size_t l = 0; l < n_layers; ++l) {
      Matrix a = (net_.layers_[l].weight * activations.back()).colwise() + net_.layers_[l].bias;
      activations.push_back(l + 1 < n_layers ? Matrix(a.array().tanh()) : a);
    }
    const Matrix residual = activations.back() * coef.asDiagonal() + noise;
    const double loss = residual.squaredNorm() / batch;

    Matrix delta = (2.0 / batch) * residual * coef.asDiagonal();
    ++t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t l = n_layers; l-- > 0;) {
      const Matrix grad_w = delta * activations[l].transpose();
      const Vector grad_b = delta.rowwise().sum();
      if (l > 0) {
        delta = (net_.layers_[l].weight.transpose() * delta).array() * (1.0 - activations[l].array().square());
      }
      adam_.m_w[l] = b1 * adam_.m_w[l] + (1.0 - b1) * grad_w;
      adam_.v_w[l] = b2 * adam_.v_w[l] + (1.0 - b2) * grad_w.cwiseAbs2();
      adam_.m_b[l] = b1 * adam_.m_b[l] + (1.0 - b1) * grad_b;
      adam_.v_b[l] = b2 * adam_.v_b[l] + (1.0 - b2) * grad_b.cwiseAbs2();
      net_.layers_[l].weight.array() -=
          lr_ * (adam_.m_w[l].array() / c1) / ((adam_.v_w[l].array() / c2).sqrt() + eps);
      net_.layers_[l].bias.array() -= lr_ * (adam_.m_b[l].array() / c1) / ((adam_.v_b[l].array() / c2).sqrt() + eps);
    }
    return loss;
  }

 private:
  ScoreNetwork& net_;
  double lr_;
  AdamState adam_;
  int t_ = 0;
};

std::shared_ptr<const TrainedScoreModel> train_score_model(const GaussianMixture& data_mixture,
                                                           const std::vector<std::size_t>& per_mode_counts,
                                                           const TrainConfig& config, const NoiseSchedule& schedule,
                                                           std::uint64_t seed, std::string label) {
  if (per_mode_counts.size() != data_mixture.size()) throw std::invalid_argument("train: need one count per mixture component");
  for (std::size_t c : per_mode_counts) {
    if (c == 0) throw std::invalid_argument("train: per-mode counts must be positive");
  }
  const int d = data_mixture.dim();
  if (d > 2) throw std::invalid_argument("train: dimension must be <= 2");

  const auto data = sample_components(data_mixture, per_mode_counts, derive_seed(seed, 0));
  Vector mean = Vector::Zero(d);
  for (const auto& x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double data_variance = 0.0;
  for (const auto& x : data) data_variance += (x - mean).squaredNorm();
  data_variance /= static_cast<double>(data.size() * d);

  Rng init(derive_seed(seed, 1));
  ScoreNetwork net(d + 2, d, config.hidden_layers, config.width, init);
  NetworkTrainer trainer(net, config.learning_rate);

  Rng rng(derive_seed(seed, 2));
  const int batch = config.batch_size;
  const int steps = schedule.steps();
  Matrix inputs(d + 2, batch);
  Matrix noise(d, batch);
  Vector coef(batch);
  std::vector<double> history;
  history.reserve(config.iterations);
  for (int it = 0; it < config.iterations; ++it) {
    for (int b = 0; b < batch; ++b) {
      const auto idx = static_cast<std::size_t>(rng.next_u64() % data.size());
      const int k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(steps));
      const Vector z = rng.gaussian_vector(d);
      const double v = schedule.accumulated_variance(k);
      inputs.col(b) = network_input(data[idx] + std::sqrt(v) * z, k, schedule, data_variance);
      noise.col(b) = z;
      coef[b] = std::sqrt(v / (data_variance + v));
    }
    const double loss = trainer.step(inputs, coef, noise);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "score-matching loss became non-finite at iteration " << it << "; recent losses:";
      for (std::size_t i = history.size() > 10 ? history.size() - 10 : 0; i < history.size(); ++i) msg << ' ' << history[i];
      throw TrainingDivergence(msg.str());
    }
    history.push_back(loss);
  }

  nlohmann::json counts = per_mode_counts;
  nlohmann::json provenance = {{"type", "trained"},
                               {"label", label},
                               {"data_mixture", data_mixture.to_json()},
                               {"counts", counts},
                               {"train", config.to_json()},
                               {"seed", seed},
                               {"schedule", schedule.to_json()}};
  return std::make_shared<const TrainedScoreModel>(std::move(net), data_variance, schedule, std::move(label),
                                                   std::move(provenance), std::move(history));
}

}  // namespace w2sd
