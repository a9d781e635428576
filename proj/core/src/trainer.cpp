#include "fairprobe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairprobe/error.hpp"
#include "fairprobe/random.hpp"

namespace fairprobe {

void TrainerConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (batch_size < 1) {
    throw ConfigError("batch size must be at least 1");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
}

MlpModel initialize_mlp(const FeatureSchema& schema, const Architecture& architecture, std::uint64_t seed) {
  MlpModel model;
  std::size_t width = 0;
  for (const auto& spec : schema.features()) {
    if (spec.is_categorical()) {
      width += spec.categorical().values.size();
    } else {
      const auto& c = spec.continuous();
      model.normalization[spec.name] = {c.min, 1.0 / (c.max - c.min)};
      width += 1;
    }
  }
  Rng rng(derive_seed(seed, {0x1417}));
  std::vector<std::size_t> sizes = {width};
  sizes.insert(sizes.end(), architecture.hidden.begin(), architecture.hidden.end());
  sizes.push_back(schema.label_names().size());
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes[l];
    layer.outputs = sizes[l + 1];
    const bool last = l + 2 == sizes.size();
    layer.activation = last ? Activation::softmax : architecture.hidden_activation;
    const double stddev = std::sqrt((last ? 1.0 : 2.0) / static_cast<double>(layer.inputs));
    layer.weights.resize(layer.inputs * layer.outputs);
    for (auto& w : layer.weights) {
      w = rng.normal() * stddev;
    }
    layer.bias.assign(layer.outputs, 0.0);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

namespace {

struct Encoded {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> targets;
};

Encoded encode_rows(const MlpModel& model, const StructuredDataset& data) {
  FeatureEncoder encoder(model, data.schema());
  const auto& schema_labels = data.schema().label_names();
  std::vector<std::size_t> target_of(schema_labels.size());
  for (std::size_t i = 0; i < schema_labels.size(); ++i) {
    if (model.labels.empty()) {
      target_of[i] = i;
    } else {
      auto it = std::find(model.labels.begin(), model.labels.end(), schema_labels[i]);
      if (it == model.labels.end()) {
        throw TrainingError("model has no output for label '" + schema_labels[i] + "'");
      }
      target_of[i] = static_cast<std::size_t>(it - model.labels.begin());
    }
  }
  Encoded out;
  for (const auto& row : data.rows()) {
    out.inputs.push_back(encoder.encode(row.features));
    out.targets.push_back(target_of[row.label]);
  }
  return out;
}

double activate(Activation a, double x) {
  switch (a) {
  case Activation::relu:
    return x > 0.0 ? x : 0.0;
  case Activation::sigmoid:
    return 1.0 / (1.0 + std::exp(-x));
  default:
    return x;
  }
}

double activation_derivative(Activation a, double activated) {
  switch (a) {
  case Activation::relu:
    return activated > 0.0 ? 1.0 : 0.0;
  case Activation::sigmoid:
    return activated * (1.0 - activated);
  default:
    return 1.0;
  }
}

/// Adam state for one parameter vector.
struct Moments {
  std::vector<double> m;
  std::vector<double> v;
  explicit Moments(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

class Optimizer {
public:
  Optimizer(const MlpModel& model, double lr) : lr_(lr) {
    for (const auto& layer : model.layers) {
      weights_.emplace_back(layer.weights.size());
      bias_.emplace_back(layer.bias.size());
    }
  }

  void step(MlpModel& model, const std::vector<std::vector<double>>& gw, const std::vector<std::vector<double>>& gb) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      update(model.layers[l].weights, gw[l], weights_[l], c1, c2);
      update(model.layers[l].bias, gb[l], bias_[l], c1, c2);
    }
  }

private:
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  void update(std::vector<double>& param, const std::vector<double>& grad, Moments& s, double c1, double c2) const {
    for (std::size_t i = 0; i < param.size(); ++i) {
      s.m[i] = beta1 * s.m[i] + (1.0 - beta1) * grad[i];
      s.v[i] = beta2 * s.v[i] + (1.0 - beta2) * grad[i] * grad[i];
      param[i] -= lr_ * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + eps);
    }
  }

  double lr_;
  std::size_t t_ = 0;
  std::vector<Moments> weights_;
  std::vector<Moments> bias_;
};

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

double accuracy_on(const MlpModel& model, const Encoded& data, const std::vector<std::size_t>& rows) {
  if (rows.empty()) {
    return 0.0;
  }
  std::size_t hits = 0;
  for (auto r : rows) {
    hits += decide(model, forward(model, data.inputs[r])) == data.targets[r] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

} // namespace

TrainResult fit_mlp(MlpModel model, const StructuredDataset& data, const TrainerConfig& config) {
  config.validate();
  model.validate();
  if (data.empty()) {
    throw TrainingError("cannot train on an empty dataset");
  }
  const auto& output_layer = model.layers.back();
  const bool single_sigmoid = output_layer.outputs == 1 && output_layer.activation == Activation::sigmoid;
  if (!single_sigmoid && output_layer.activation != Activation::softmax &&
      output_layer.activation != Activation::identity) {
    throw TrainingError("output layer must be softmax, identity (logits) or a single sigmoid unit");
  }
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    if (model.layers[l].activation == Activation::softmax) {
      throw TrainingError("softmax is only supported on the output layer");
    }
  }

  const auto encoded = encode_rows(model, data);
  Rng rng(derive_seed(config.seed, {0x7a11}));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  const auto n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> training(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(training.begin(), training.end());
  if (training.empty()) {
    throw TrainingError("validation split leaves no training rows");
  }

  const std::size_t depth = model.layers.size();
  Optimizer optimizer(model, config.learning_rate);
  std::vector<std::vector<double>> gw(depth);
  std::vector<std::vector<double>> gb(depth);
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<std::vector<double>> delta(depth);

  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(training, rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < training.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(training.size(), start + config.batch_size);
      for (std::size_t l = 0; l < depth; ++l) {
        gw[l].assign(model.layers[l].weights.size(), 0.0);
        gb[l].assign(model.layers[l].bias.size(), 0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const auto row = training[b];
        acts[0] = encoded.inputs[row];
        for (std::size_t l = 0; l < depth; ++l) {
          const auto& layer = model.layers[l];
          auto& out = acts[l + 1];
          out.assign(layer.outputs, 0.0);
          for (std::size_t o = 0; o < layer.outputs; ++o) {
            double acc = layer.bias[o];
            const double* w = layer.weights.data() + o * layer.inputs;
            for (std::size_t i = 0; i < layer.inputs; ++i) {
              acc += w[i] * acts[l][i];
            }
            out[o] = acc;
          }
          if (l + 1 < depth) {
            for (auto& x : out) {
              x = activate(layer.activation, x);
            }
          }
        }
        // output: probabilities and dLoss/dlogit = p - y
        auto& logits = acts[depth];
        const auto target = encoded.targets[row];
        delta[depth - 1].assign(logits.size(), 0.0);
        if (single_sigmoid) {
          const double p = 1.0 / (1.0 + std::exp(-logits[0]));
          const double y = target == 1 ? 1.0 : 0.0;
          batch_loss -= y * std::log(std::max(p, 1e-300)) + (1.0 - y) * std::log(std::max(1.0 - p, 1e-300));
          delta[depth - 1][0] = p - y;
        } else {
          const double peak = *std::max_element(logits.begin(), logits.end());
          double sum = 0.0;
          for (auto z : logits) {
            sum += std::exp(z - peak);
          }
          for (std::size_t o = 0; o < logits.size(); ++o) {
            const double p = std::exp(logits[o] - peak) / sum;
            delta[depth - 1][o] = p - (o == target ? 1.0 : 0.0);
          }
          batch_loss -= (logits[target] - peak) - std::log(sum);
        }
        for (std::size_t l = depth; l-- > 0;) {
          const auto& layer = model.layers[l];
          const auto& input = acts[l];
          for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double d = delta[l][o];
            gb[l][o] += d;
            double* g = gw[l].data() + o * layer.inputs;
            for (std::size_t i = 0; i < layer.inputs; ++i) {
              g[i] += d * input[i];
            }
          }
          if (l > 0) {
            const auto& below = model.layers[l - 1];
            delta[l - 1].assign(layer.inputs, 0.0);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
              const double d = delta[l][o];
              const double* w = layer.weights.data() + o * layer.inputs;
              for (std::size_t i = 0; i < layer.inputs; ++i) {
                delta[l - 1][i] += d * w[i];
              }
            }
            for (std::size_t i = 0; i < layer.inputs; ++i) {
              delta[l - 1][i] *= activation_derivative(below.activation, input[i]);
            }
          }
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < depth; ++l) {
        for (auto& g : gw[l]) {
          g *= scale;
        }
        for (auto& g : gb[l]) {
          g *= scale;
        }
      }
      optimizer.step(model, gw, gb);
      epoch_loss += batch_loss;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(training.size()));
  }

  result.train_accuracy = accuracy_on(model, encoded, training);
  if (!validation.empty()) {
    result.validation_accuracy = accuracy_on(model, encoded, validation);
  }
  result.model = std::move(model);
  return result;
}

TrainResult train_mlp(const StructuredDataset& data, const Architecture& architecture, const TrainerConfig& config) {
  return fit_mlp(initialize_mlp(data.schema(), architecture, config.seed), data, config);
}

double accuracy(const MlpModel& model, const StructuredDataset& data) {
  if (data.empty()) {
    return 0.0;
  }
  const auto encoded = encode_rows(model, data);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return accuracy_on(model, encoded, rows);
}

} // namespace fairprobe
