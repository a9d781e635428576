#include "fairprobe/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairprobe/error.hpp"

namespace fairprobe {

using nlohmann::json;

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") {
    return Activation::identity;
  }
  if (name == "relu") {
    return Activation::relu;
  }
  if (name == "sigmoid") {
    return Activation::sigmoid;
  }
  if (name == "softmax") {
    return Activation::softmax;
  }
  throw SchemaError("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) noexcept {
  switch (a) {
  case Activation::identity:
    return "identity";
  case Activation::relu:
    return "relu";
  case Activation::sigmoid:
    return "sigmoid";
  case Activation::softmax:
    return "softmax";
  }
  return "identity";
}

void MlpModel::validate() const {
  if (layers.empty()) {
    throw SchemaError("model has no layers");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const auto where = "layer " + std::to_string(l);
    if (layer.inputs == 0 || layer.outputs == 0) {
      throw SchemaError(where + " has a zero dimension");
    }
    if (layer.weights.size() != layer.inputs * layer.outputs) {
      throw SchemaError(where + ": weight matrix is not " + std::to_string(layer.outputs) + "x" +
                        std::to_string(layer.inputs));
    }
    if (layer.bias.size() != layer.outputs) {
      throw SchemaError(where + ": bias length " + std::to_string(layer.bias.size()) + " != " +
                        std::to_string(layer.outputs));
    }
    if (l > 0 && layers[l - 1].outputs != layer.inputs) {
      throw SchemaError(where + " expects " + std::to_string(layer.inputs) + " inputs but layer " +
                        std::to_string(l - 1) + " produces " + std::to_string(layers[l - 1].outputs));
    }
  }
}

namespace {

void apply_activation(Activation a, std::vector<double>& v) {
  switch (a) {
  case Activation::identity:
    break;
  case Activation::relu:
    for (auto& x : v) {
      x = std::max(0.0, x);
    }
    break;
  case Activation::sigmoid:
    for (auto& x : v) {
      x = 1.0 / (1.0 + std::exp(-x));
    }
    break;
  case Activation::softmax: {
    const double peak = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (auto& x : v) {
      x = std::exp(x - peak);
      sum += x;
    }
    for (auto& x : v) {
      x /= sum;
    }
    break;
  }
  }
}

} // namespace

std::vector<double> forward(const MlpModel& model, std::span<const double> input) {
  if (input.size() != model.input_width()) {
    throw SchemaError("input width " + std::to_string(input.size()) + " != model input width " +
                      std::to_string(model.input_width()));
  }
  std::vector<double> current(input.begin(), input.end());
  std::vector<double> next;
  for (const auto& layer : model.layers) {
    next.assign(layer.outputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = layer.weights.data() + o * layer.inputs;
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        acc += row[i] * current[i];
      }
      next[o] = acc;
    }
    apply_activation(layer.activation, next);
    current.swap(next);
  }
  return current;
}

std::size_t decide(const MlpModel& model, std::span<const double> output) {
  if (output.size() == 1 && model.layers.back().activation == Activation::sigmoid) {
    return output[0] > 0.5 ? 1 : 0;
  }
  // max_element returns the first maximum, i.e. the lowest index on ties
  return static_cast<std::size_t>(std::max_element(output.begin(), output.end()) - output.begin());
}

FeatureEncoder::FeatureEncoder(const MlpModel& model, const FeatureSchema& schema) {
  model.validate();
  for (const auto& [name, values] : model.encoding) {
    if (!schema.index_of(name)) {
      throw SchemaError("model encoding names unknown feature '" + name + "'");
    }
  }
  for (const auto& [name, affine] : model.normalization) {
    if (!schema.index_of(name)) {
      throw SchemaError("model normalization names unknown feature '" + name + "'");
    }
  }
  for (const auto& spec : schema.features()) {
    Slot slot;
    slot.offset = width_;
    if (spec.is_categorical()) {
      const auto& domain = spec.categorical().values;
      slot.one_hot = true;
      auto it = model.encoding.find(spec.name);
      const auto& order = it == model.encoding.end() ? domain : it->second;
      if (order.size() != domain.size()) {
        throw SchemaError("encoding of '" + spec.name + "' must list all " + std::to_string(domain.size()) +
                          " values");
      }
      slot.position_of_value.resize(domain.size());
      for (std::size_t v = 0; v < domain.size(); ++v) {
        auto pos = std::find(order.begin(), order.end(), domain[v]);
        if (pos == order.end()) {
          throw SchemaError("encoding of '" + spec.name + "' is missing value '" + domain[v] + "'");
        }
        slot.position_of_value[v] = static_cast<std::size_t>(pos - order.begin());
      }
      width_ += domain.size();
    } else {
      if (auto it = model.normalization.find(spec.name); it != model.normalization.end()) {
        slot.affine = it->second;
      }
      width_ += 1;
    }
    slots_.push_back(std::move(slot));
  }
  if (width_ != model.input_width()) {
    throw SchemaError("dimension mismatch: encoded width " + std::to_string(width_) + " != first layer inputs " +
                      std::to_string(model.input_width()));
  }
}

void FeatureEncoder::encode(std::span<const double> sample, std::span<double> out) const {
  if (sample.size() != slots_.size() || out.size() != width_) {
    throw SchemaError("sample does not match the encoder layout");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t f = 0; f < slots_.size(); ++f) {
    const auto& slot = slots_[f];
    if (slot.one_hot) {
      const auto v = static_cast<std::size_t>(sample[f]);
      if (sample[f] < 0 || v >= slot.position_of_value.size()) {
        throw SchemaError("categorical value index out of range");
      }
      out[slot.offset + slot.position_of_value[v]] = 1.0;
    } else {
      out[slot.offset] = (sample[f] - slot.affine.shift) * slot.affine.scale;
    }
  }
}

std::vector<double> FeatureEncoder::encode(std::span<const double> sample) const {
  std::vector<double> out(width_);
  encode(sample, out);
  return out;
}

MlpOracle::MlpOracle(MlpModel model, FeatureSchema schema)
    : model_(std::move(model)), schema_(std::move(schema)), encoder_(model_, schema_) {
  labels_ = model_.labels.empty() ? schema_.label_names() : model_.labels;
  const auto out = model_.output_width();
  const bool binary_sigmoid = out == 1 && model_.layers.back().activation == Activation::sigmoid;
  if (binary_sigmoid ? labels_.size() != 2 : out != labels_.size()) {
    throw SchemaError("final layer width " + std::to_string(out) + " does not fit " +
                      std::to_string(labels_.size()) + " labels");
  }
}

std::size_t MlpOracle::predict_index(std::span<const double> sample) const {
  const auto input = encoder_.encode(sample);
  return decide(model_, forward(model_, input));
}

std::vector<Label> MlpOracle::predict_batch(std::span<const FeatureVector> samples) {
  std::vector<Label> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(labels_[predict_index(s)]);
  }
  return out;
}

Label mlp_predict(const MlpModel& model, const FeatureSchema& schema, const FeatureVector& sample) {
  MlpOracle oracle(model, schema);
  return oracle.labels()[oracle.predict_index(sample)];
}

MlpModel parse_mlp_json(std::string_view text) {
  MlpModel model;
  try {
    const auto j = json::parse(text);
    if (j.contains("labels")) {
      model.labels = j.at("labels").get<std::vector<std::string>>();
    }
    if (j.contains("normalization")) {
      for (const auto& [name, t] : j.at("normalization").items()) {
        model.normalization[name] = {t.value("shift", 0.0), t.value("scale", 1.0)};
      }
    }
    if (j.contains("encoding")) {
      model.encoding = j.at("encoding").get<std::map<std::string, std::vector<std::string>>>();
    }
    for (const auto& jl : j.at("layers")) {
      DenseLayer layer;
      const auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
      layer.outputs = rows.size();
      layer.inputs = rows.empty() ? 0 : rows.front().size();
      for (const auto& row : rows) {
        if (row.size() != layer.inputs) {
          throw SchemaError("ragged weight matrix");
        }
        layer.weights.insert(layer.weights.end(), row.begin(), row.end());
      }
      layer.bias = jl.at("bias").get<std::vector<double>>();
      layer.activation = parse_activation(jl.value("activation", std::string("identity")));
      model.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
  model.validate();
  return model;
}

MlpModel load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("cannot open model file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mlp_json(buf.str());
}

std::string mlp_to_json(const MlpModel& model) {
  json j = json::object();
  if (!model.labels.empty()) {
    j["labels"] = model.labels;
  }
  json norm = json::object();
  for (const auto& [name, t] : model.normalization) {
    norm[name] = {{"shift", t.shift}, {"scale", t.scale}};
  }
  j["normalization"] = std::move(norm);
  j["encoding"] = model.encoding.empty() ? json::object() : json(model.encoding);
  json layers = json::array();
  for (const auto& layer : model.layers) {
    json rows = json::array();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      rows.push_back(std::vector<double>(layer.weights.begin() + static_cast<std::ptrdiff_t>(o * layer.inputs),
                                         layer.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * layer.inputs)));
    }
    layers.push_back({{"weights", std::move(rows)}, {"bias", layer.bias}, {"activation", activation_name(layer.activation)}});
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

void save_mlp(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw SchemaError("cannot write model file " + path.string());
  }
  out << mlp_to_json(model) << '\n';
}

} // namespace fairprobe
