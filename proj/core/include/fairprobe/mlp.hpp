#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/oracle.hpp"
#include "fairprobe/schema.hpp"

namespace fairprobe {

enum class Activation { identity, relu, sigmoid, softmax };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation a) noexcept;

/// Fully connected layer; `weights` is row-major with one row per output unit.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  double weight(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }
  bool operator==(const DenseLayer&) const = default;
};

/// Continuous input transform: (x - shift) * scale.
struct AffineTransform {
  double shift = 0.0;
  double scale = 1.0;
  bool operator==(const AffineTransform&) const = default;
};

/// Feed-forward classifier together with its input preprocessing.
///
/// Inputs are laid out in schema feature order. A categorical feature becomes
/// a one-hot block whose slot order is `encoding[name]` (schema value order
/// when absent); a continuous feature becomes one value transformed by
/// `normalization[name]` (identity when absent).
struct MlpModel {
  std::vector<std::string> labels; ///< empty: use the schema's labels
  std::map<std::string, AffineTransform> normalization;
  std::map<std::string, std::vector<std::string>> encoding;
  std::vector<DenseLayer> layers;

  /// Checks layer shapes; throws SchemaError.
  void validate() const;
  std::size_t input_width() const { return layers.front().inputs; }
  std::size_t output_width() const { return layers.back().outputs; }

  bool operator==(const MlpModel&) const = default;
};

/// Final-layer activations for an already encoded input.
std::vector<double> forward(const MlpModel& model, std::span<const double> input);

/// Label index from final activations: argmax with ties to the lower index,
/// or `> 0.5` for a single sigmoid unit.
std::size_t decide(const MlpModel& model, std::span<const double> output);

/// Maps schema-conformant samples onto the network input layout.
class FeatureEncoder {
public:
  /// Throws SchemaError when the encoding does not fit the schema or the
  /// resulting width differs from the first layer.
  FeatureEncoder(const MlpModel& model, const FeatureSchema& schema);

  std::size_t width() const noexcept { return width_; }
  void encode(std::span<const double> sample, std::span<double> out) const;
  std::vector<double> encode(std::span<const double> sample) const;

private:
  struct Slot {
    bool one_hot = false;
    std::size_t offset = 0;
    std::vector<std::size_t> position_of_value;
    AffineTransform affine;
  };
  std::vector<Slot> slots_;
  std::size_t width_ = 0;
};

/// In-process oracle backed by an MlpModel. Stateless after construction.
class MlpOracle final : public StructuredOracle {
public:
  MlpOracle(MlpModel model, FeatureSchema schema);

  std::vector<Label> predict_batch(std::span<const FeatureVector> samples) override;
  std::size_t predict_index(std::span<const double> sample) const;

  const MlpModel& model() const noexcept { return model_; }
  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
  MlpModel model_;
  FeatureSchema schema_;
  FeatureEncoder encoder_;
  std::vector<std::string> labels_;
};

Label mlp_predict(const MlpModel& model, const FeatureSchema& schema, const FeatureVector& sample);

MlpModel parse_mlp_json(std::string_view json);
MlpModel load_mlp(const std::filesystem::path& path);
std::string mlp_to_json(const MlpModel& model);
void save_mlp(const MlpModel& model, const std::filesystem::path& path);

} // namespace fairprobe
