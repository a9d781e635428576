#include <doctest.h>

#include <cmath>
#include <limits>

#include "fairprobe/error.hpp"
#include "fairprobe/trainer.hpp"
#include "synthetic.hpp"

using namespace fairprobe;

namespace {

// label 1 iff x1 + x2 > 1, ignoring the sensitive features
StructuredDataset separable(std::size_t rows, std::uint64_t seed) {
  return fptest::planted_dataset(rows, seed, [](const FeatureVector& x, Rng&) {
    return static_cast<std::size_t>(x[3] + x[4] > 1.0);
  });
}

} // namespace

TEST_CASE("initialization shapes the network to the schema") {
  const auto schema = fptest::mixed_schema();
  const auto m = initialize_mlp(schema, Architecture{{6, 4}, Activation::sigmoid}, 1);
  REQUIRE(m.layers.size() == 3);
  CHECK(m.input_width() == 2 + 4 + 3);
  CHECK(m.layers[0].outputs == 6);
  CHECK(m.layers[1].activation == Activation::sigmoid);
  CHECK(m.layers[2].activation == Activation::softmax);
  CHECK(m.output_width() == 2);
  CHECK(m.normalization.at("age").shift == 18);
  CHECK(m.normalization.at("age").scale == doctest::Approx(1.0 / 62));
  CHECK(initialize_mlp(schema, Architecture{{6, 4}, Activation::sigmoid}, 1) == m);
  CHECK_FALSE(initialize_mlp(schema, Architecture{{6, 4}, Activation::sigmoid}, 2) == m);
  CHECK(initialize_mlp(schema, Architecture{{}, Activation::relu}, 1).layers.size() == 1);
}

TEST_CASE("a linearly separable problem is learned") {
  const auto data = separable(2000, 1);
  TrainerConfig c;
  c.epochs = 60;
  c.learning_rate = 0.01;
  c.seed = 3;
  c.validation_fraction = 0.25;
  const auto r = train_mlp(data, Architecture{{8}, Activation::relu}, c);
  CHECK(r.train_accuracy >= 0.95);
  REQUIRE(r.validation_accuracy.has_value());
  CHECK(*r.validation_accuracy >= 0.93);
  REQUIRE(r.epoch_loss.size() == 60);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  CHECK(accuracy(r.model, data) >= 0.94);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto data = separable(300, 2);
  TrainerConfig c;
  c.epochs = 5;
  c.seed = 8;
  const auto a = train_mlp(data, Architecture{}, c);
  const auto b = train_mlp(data, Architecture{}, c);
  CHECK(a.model == b.model);
  CHECK(a.epoch_loss == b.epoch_loss);
  c.seed = 9;
  CHECK_FALSE(train_mlp(data, Architecture{}, c).model == a.model);
}

TEST_CASE("zero epochs leave the weights untouched") {
  const auto data = separable(100, 3);
  const auto start = initialize_mlp(data.schema(), Architecture{}, 4);
  TrainerConfig c;
  c.epochs = 0;
  const auto r = fit_mlp(start, data, c);
  CHECK(r.model == start);
  CHECK(r.epoch_loss.empty());
  CHECK(r.train_accuracy == accuracy(start, data));
}

TEST_CASE("a single-class dataset trains to that class") {
  const auto data = fptest::planted_dataset(200, 4, [](const FeatureVector&, Rng&) { return std::size_t{1}; });
  TrainerConfig c;
  c.epochs = 10;
  const auto r = train_mlp(data, Architecture{{4}, Activation::relu}, c);
  CHECK(r.train_accuracy == 1.0);
}

TEST_CASE("a single sigmoid output unit is supported") {
  const auto data = separable(1000, 5);
  auto m = initialize_mlp(data.schema(), Architecture{{8}, Activation::relu}, 1);
  auto& out = m.layers.back();
  out.outputs = 1;
  out.weights.resize(out.inputs);
  out.bias.resize(1);
  out.activation = Activation::sigmoid;
  TrainerConfig c;
  c.epochs = 40;
  c.learning_rate = 0.01;
  CHECK(fit_mlp(m, data, c).train_accuracy >= 0.93);
}

TEST_CASE("a diverging run reports where it blew up") {
  const auto data = separable(64, 6);
  auto m = initialize_mlp(data.schema(), Architecture{{4}, Activation::relu}, 1);
  m.layers.back().bias[0] = std::numeric_limits<double>::infinity();
  TrainerConfig c;
  c.epochs = 2;
  c.batch_size = 16;
  CHECK_THROWS_WITH_AS(fit_mlp(m, data, c), doctest::Contains("non-finite loss at epoch 0, batch 0"), TrainingError);
}

TEST_CASE("unsupported setups are refused") {
  const auto data = separable(50, 7);
  auto m = initialize_mlp(data.schema(), Architecture{{4}, Activation::relu}, 1);
  auto inner = m;
  inner.layers[0].activation = Activation::softmax;
  CHECK_THROWS_AS(fit_mlp(inner, data, {}), TrainingError);
  auto relu_out = m;
  relu_out.layers.back().activation = Activation::relu;
  CHECK_THROWS_AS(fit_mlp(relu_out, data, {}), TrainingError);
  const StructuredDataset empty(data.schema(), {});
  CHECK_THROWS_AS(fit_mlp(m, empty, {}), TrainingError);

  TrainerConfig c;
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.validation_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
