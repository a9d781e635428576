#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairprobe {

/// A structured sample. Continuous features hold their value; categorical
/// features hold the index of the value in the feature's value list.
using FeatureVector = std::vector<double>;

struct CategoricalDomain {
  std::vector<std::string> values;
  bool operator==(const CategoricalDomain&) const = default;
};

struct ContinuousDomain {
  double min = 0.0;
  double max = 1.0;
  bool integer = false;
  bool operator==(const ContinuousDomain&) const = default;
};

struct FeatureSpec {
  std::string name;
  std::variant<CategoricalDomain, ContinuousDomain> domain;
  bool sensitive = false;

  bool is_categorical() const noexcept { return std::holds_alternative<CategoricalDomain>(domain); }
  bool is_continuous() const noexcept { return std::holds_alternative<ContinuousDomain>(domain); }
  const CategoricalDomain& categorical() const { return std::get<CategoricalDomain>(domain); }
  const ContinuousDomain& continuous() const { return std::get<ContinuousDomain>(domain); }

  std::optional<std::size_t> value_index(std::string_view value) const;
  /// True when `v` is a legal encoded value for this feature.
  bool admits(double v) const noexcept;

  bool operator==(const FeatureSpec&) const = default;
};

class FeatureSchema {
public:
  /// Validates all invariants; throws SchemaError.
  FeatureSchema(std::vector<FeatureSpec> features, std::vector<std::string> label_names,
                std::string favorable_label, std::string label_column = "label");

  std::span<const FeatureSpec> features() const noexcept { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  std::size_t size() const noexcept { return features_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  const std::string& favorable_label() const noexcept { return favorable_label_; }
  std::size_t favorable_index() const noexcept { return favorable_index_; }
  std::optional<std::size_t> label_index(std::string_view label) const;
  const std::string& label_column() const noexcept { return label_column_; }

  std::vector<std::size_t> sensitive_indices() const;
  bool conforms(std::span<const double> sample) const noexcept;

  bool operator==(const FeatureSchema&) const = default;

private:
  std::vector<FeatureSpec> features_;
  std::vector<std::string> label_names_;
  std::string favorable_label_;
  std::string label_column_;
  std::size_t favorable_index_ = 0;
};

FeatureSchema parse_schema_json(std::string_view json);
FeatureSchema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const FeatureSchema& schema);

} // namespace fairprobe
