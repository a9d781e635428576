#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fairprobe/error.hpp"
#include "fairprobe/mlp.hpp"
#include "fairprobe/trainer.hpp"
#include "synthetic.hpp"

using namespace fairprobe;

namespace {

// 2 -> 2 relu -> 2 softmax, small enough to evaluate by hand.
MlpModel hand_model() {
  return parse_mlp_json(R"({
    "layers": [
      {"weights": [[1, -1], [0.5, 2]], "bias": [0, -1], "activation": "relu"},
      {"weights": [[1, 0], [0, 1]], "bias": [0, 0], "activation": "softmax"}
    ]
  })");
}

} // namespace

TEST_CASE("forward pass matches a hand computation") {
  const auto m = hand_model();
  // hidden = relu([1 - 2, 0.5 + 4 - 1]) = [0, 3.5]
  const auto out = forward(m, std::vector<double>{1, 2});
  REQUIRE(out.size() == 2);
  const double e = std::exp(3.5);
  CHECK(out[0] == doctest::Approx(1 / (1 + e)).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(e / (1 + e)).epsilon(1e-12));
  CHECK(decide(m, out) == 1);
  CHECK_THROWS_AS(forward(m, std::vector<double>{1}), SchemaError);
}

TEST_CASE("activations") {
  auto m = parse_mlp_json(R"({"layers": [{"weights": [[1]], "bias": [0], "activation": "sigmoid"}]})");
  CHECK(forward(m, std::vector<double>{0})[0] == doctest::Approx(0.5));
  CHECK(forward(m, std::vector<double>{2})[0] == doctest::Approx(1 / (1 + std::exp(-2.0))));
  CHECK(decide(m, std::vector<double>{0.5}) == 0);
  CHECK(decide(m, std::vector<double>{0.5000001}) == 1);
  m.layers[0].activation = Activation::identity;
  CHECK(forward(m, std::vector<double>{-3})[0] == -3);
  CHECK(parse_activation("relu") == Activation::relu);
  CHECK(activation_name(Activation::softmax) == "softmax");
  CHECK_THROWS_AS(parse_activation("tanh"), SchemaError);
}

TEST_CASE("ties go to the lower label index") {
  const auto m = hand_model();
  CHECK(decide(m, std::vector<double>{0.5, 0.5}) == 0);
  CHECK(decide(m, std::vector<double>{0.2, 0.4, 0.4}) == 1);
}

TEST_CASE("layer shapes are validated") {
  CHECK_THROWS_AS(parse_mlp_json(R"({"layers": []})"), SchemaError);
  CHECK_THROWS_AS(parse_mlp_json(R"({"layers": [{"weights": [[1, 2], [3]], "bias": [0, 0]}]})"), SchemaError);
  CHECK_THROWS_AS(parse_mlp_json(R"({"layers": [{"weights": [[1, 2]], "bias": [0, 0]}]})"), SchemaError);
  CHECK_THROWS_AS(parse_mlp_json(R"({"layers": [{"weights": [[1, 2]], "bias": [0]},
                                                {"weights": [[1, 2]], "bias": [0]}]})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_mlp_json("{}"), SchemaError);
  CHECK_THROWS_AS(load_mlp("/nonexistent/model.json"), SchemaError);
}

TEST_CASE("encoder lays out one-hot blocks and normalized values") {
  const auto schema = fptest::mixed_schema();
  MlpModel m;
  m.encoding["race"] = {"other", "asian", "black", "white"};
  m.normalization["age"] = {18, 1.0 / 62};
  m.layers = {DenseLayer{9, 2, std::vector<double>(18, 0.0), {0, 0}, Activation::softmax}};
  const FeatureEncoder enc(m, schema);
  CHECK(enc.width() == 9);
  // male, black, 49, 0.3, 0.7
  const auto x = enc.encode(std::vector<double>{1, 1, 49, 0.3, 0.7});
  const std::vector<double> expected{0, 1, 0, 0, 1, 0, 0.5, 0.3, 0.7};
  REQUIRE(x.size() == expected.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i] == doctest::Approx(expected[i]));
  }
  CHECK_THROWS_AS(enc.encode(std::vector<double>{1, 1, 49}), SchemaError);
  CHECK_THROWS_AS(enc.encode(std::vector<double>{1, 7, 49, 0.3, 0.7}), SchemaError);

  auto wide = m;
  wide.layers[0].inputs = 10;
  wide.layers[0].weights.resize(20);
  CHECK_THROWS_WITH_AS(FeatureEncoder(wide, schema), doctest::Contains("dimension mismatch"), SchemaError);
  auto partial = m;
  partial.encoding["race"] = {"white", "black"};
  CHECK_THROWS_AS(FeatureEncoder(partial, schema), SchemaError);
  auto unknown = m;
  unknown.normalization["height"] = {};
  CHECK_THROWS_AS(FeatureEncoder(unknown, schema), SchemaError);
}

TEST_CASE("oracle labels come from the schema unless the model names them") {
  const auto schema = fptest::planted_schema();
  auto m = fptest::tiny_model();
  MlpOracle plain(m, schema);
  CHECK(plain.labels() == schema.label_names());
  m.labels = {"deny", "grant"};
  MlpOracle named(m, schema);
  CHECK(named.labels() == std::vector<std::string>{"deny", "grant"});
  m.labels = {"a", "b", "c"};
  CHECK_THROWS_AS(MlpOracle(m, schema), SchemaError);
}

TEST_CASE("batch prediction equals one-by-one prediction") {
  const auto schema = fptest::planted_schema();
  const auto model = initialize_mlp(schema, Architecture{}, 3);
  MlpOracle oracle(model, schema);
  const auto data = fptest::planted_dataset(300, 9, [](const FeatureVector&, Rng& r) { return r.uniform_index(2); });
  std::vector<FeatureVector> xs;
  for (const auto& row : data.rows()) {
    xs.push_back(row.features);
  }
  const auto batch = oracle.predict_batch(xs);
  REQUIRE(batch.size() == xs.size());
  std::size_t favorable = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(batch[i] == oracle.predict(xs[i]));
    CHECK(batch[i] == mlp_predict(model, schema, xs[i]));
    favorable += batch[i] == "1";
  }
  CHECK(oracle.predict_batch(std::span<const FeatureVector>{}).empty());
  CHECK(favorable > 0);
  CHECK(favorable < xs.size());
}

TEST_CASE("model json round trip") {
  auto m = fptest::tiny_model();
  m.labels = {"0", "1"};
  m.normalization["x1"] = {0.25, 4};
  m.encoding["race"] = {"asian", "black", "other", "white"};
  CHECK(parse_mlp_json(mlp_to_json(m)) == m);

  const auto path = std::filesystem::temp_directory_path() / "fairprobe_model_roundtrip.json";
  save_mlp(m, path);
  CHECK(load_mlp(path) == m);
  std::filesystem::remove(path);
}

TEST_CASE("demo model agrees with most demo labels") {
  const auto schema = load_schema(FAIRPROBE_DEMO_DIR "/schema.json");
  MlpOracle oracle(load_mlp(FAIRPROBE_DEMO_DIR "/loans_model.json"), schema);
  const auto data = load_structured(FAIRPROBE_DEMO_DIR "/loans.csv", schema);
  std::size_t agree = 0;
  for (const auto& row : data.rows()) {
    agree += oracle.predict_index(row.features) == row.label;
  }
  CHECK(static_cast<double>(agree) / static_cast<double>(data.size()) > 0.7);
}
