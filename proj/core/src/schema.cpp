#include "fairprobe/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairprobe/error.hpp"

namespace fairprobe {

using nlohmann::json;

std::optional<std::size_t> FeatureSpec::value_index(std::string_view value) const {
  if (!is_categorical()) {
    return std::nullopt;
  }
  const auto& values = categorical().values;
  auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - values.begin());
}

bool FeatureSpec::admits(double v) const noexcept {
  if (!std::isfinite(v)) {
    return false;
  }
  if (const auto* cat = std::get_if<CategoricalDomain>(&domain)) {
    return v >= 0.0 && v < static_cast<double>(cat->values.size()) && std::floor(v) == v;
  }
  const auto& c = std::get<ContinuousDomain>(domain);
  if (v < c.min || v > c.max) {
    return false;
  }
  return !c.integer || std::floor(v) == v;
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features, std::vector<std::string> label_names,
                             std::string favorable_label, std::string label_column)
    : features_(std::move(features)),
      label_names_(std::move(label_names)),
      favorable_label_(std::move(favorable_label)),
      label_column_(std::move(label_column)) {
  if (features_.empty()) {
    throw SchemaError("schema has no features");
  }
  std::set<std::string> names;
  bool any_sensitive = false;
  for (const auto& f : features_) {
    if (f.name.empty()) {
      throw SchemaError("feature with empty name");
    }
    if (!names.insert(f.name).second) {
      throw SchemaError("duplicate feature name '" + f.name + "'");
    }
    if (f.name == label_column_) {
      throw SchemaError("feature '" + f.name + "' collides with the label column");
    }
    any_sensitive = any_sensitive || f.sensitive;
    if (const auto* cat = std::get_if<CategoricalDomain>(&f.domain)) {
      if (cat->values.empty()) {
        throw SchemaError("categorical feature '" + f.name + "' has no values");
      }
      std::set<std::string> seen(cat->values.begin(), cat->values.end());
      if (seen.size() != cat->values.size()) {
        throw SchemaError("categorical feature '" + f.name + "' has duplicate values");
      }
    } else {
      const auto& c = f.continuous();
      if (!std::isfinite(c.min) || !std::isfinite(c.max) || !(c.min < c.max)) {
        throw SchemaError("continuous feature '" + f.name + "' needs finite min < max");
      }
    }
  }
  if (!any_sensitive) {
    throw SchemaError("schema marks no feature as sensitive");
  }
  if (label_names_.size() < 2) {
    throw SchemaError("schema needs at least two labels");
  }
  if (std::set<std::string>(label_names_.begin(), label_names_.end()).size() != label_names_.size()) {
    throw SchemaError("duplicate label names");
  }
  auto fav = label_index(favorable_label_);
  if (!fav) {
    throw SchemaError("favorable label '" + favorable_label_ + "' is not one of the labels");
  }
  favorable_index_ = *fav;
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> FeatureSchema::label_index(std::string_view label) const {
  auto it = std::find(label_names_.begin(), label_names_.end(), label);
  if (it == label_names_.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - label_names_.begin());
}

std::vector<std::size_t> FeatureSchema::sensitive_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].sensitive) {
      out.push_back(i);
    }
  }
  return out;
}

bool FeatureSchema::conforms(std::span<const double> sample) const noexcept {
  if (sample.size() != features_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!features_[i].admits(sample[i])) {
      return false;
    }
  }
  return true;
}

namespace {

FeatureSpec parse_feature(const json& j) {
  FeatureSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.sensitive = j.value("sensitive", false);
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "categorical") {
    CategoricalDomain cat;
    for (const auto& v : j.at("values")) {
      cat.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    spec.domain = std::move(cat);
  } else if (kind == "continuous") {
    ContinuousDomain c;
    c.min = j.at("min").get<double>();
    c.max = j.at("max").get<double>();
    c.integer = j.value("integer", false);
    spec.domain = c;
  } else {
    throw SchemaError("feature '" + spec.name + "': unknown kind '" + kind + "'");
  }
  return spec;
}

} // namespace

FeatureSchema parse_schema_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
  }
  try {
    std::vector<FeatureSpec> features;
    for (const auto& f : j.at("features")) {
      features.push_back(parse_feature(f));
    }
    std::vector<std::string> labels = {"0", "1"};
    if (j.contains("labels")) {
      labels = j.at("labels").get<std::vector<std::string>>();
    }
    return FeatureSchema(std::move(features), std::move(labels), j.at("favorable_label").get<std::string>(),
                         j.value("label", std::string("label")));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

FeatureSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("cannot open schema file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_json(buf.str());
}

std::string schema_to_json(const FeatureSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features()) {
    json jf = {{"name", f.name}, {"sensitive", f.sensitive}};
    if (f.is_categorical()) {
      jf["kind"] = "categorical";
      jf["values"] = f.categorical().values;
    } else {
      jf["kind"] = "continuous";
      jf["min"] = f.continuous().min;
      jf["max"] = f.continuous().max;
      jf["integer"] = f.continuous().integer;
    }
    features.push_back(std::move(jf));
  }
  json j = {{"features", std::move(features)},
            {"label", schema.label_column()},
            {"labels", schema.label_names()},
            {"favorable_label", schema.favorable_label()}};
  return j.dump(2);
}

} // namespace fairprobe
