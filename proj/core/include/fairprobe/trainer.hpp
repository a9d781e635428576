#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/mlp.hpp"

namespace fairprobe {

struct Architecture {
  std::vector<std::size_t> hidden = {16, 8};
  Activation hidden_activation = Activation::relu;
};

/// Mini-batch Adam on cross-entropy.
struct TrainerConfig {
  double learning_rate = 0.005;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Fraction of rows held out (after a seeded shuffle) to report validation
  /// accuracy. 0 trains on everything.
  double validation_fraction = 0.0;

  void validate() const;
};

struct TrainResult {
  MlpModel model;
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
  std::vector<double> epoch_loss;
};

/// Fresh network for the schema: continuous inputs scaled to [0, 1] by their
/// declared range, one-hot categoricals, He-initialized hidden layers and a
/// softmax output over the schema labels.
MlpModel initialize_mlp(const FeatureSchema& schema, const Architecture& architecture, std::uint64_t seed);

/// initialize_mlp followed by fit_mlp.
TrainResult train_mlp(const StructuredDataset& data, const Architecture& architecture, const TrainerConfig& config);

/// Continues training from the given weights. Deterministic for a fixed
/// config. Throws TrainingError on a non-finite loss, naming epoch and batch.
TrainResult fit_mlp(MlpModel model, const StructuredDataset& data, const TrainerConfig& config);

/// Fraction of rows whose predicted label equals the row label.
double accuracy(const MlpModel& model, const StructuredDataset& data);

} // namespace fairprobe
