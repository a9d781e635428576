#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fairprobe/schema.hpp"

namespace fairprobe {

/// K equal-width intervals over a declared range. Intervals are half-open
/// [lo, hi) except the last, which is closed at the range maximum.
class Binning {
public:
  Binning(std::string feature, double min, double max, std::size_t bins);

  const std::string& feature() const noexcept { return feature_; }
  std::size_t bins() const noexcept { return edges_.size() - 1; }
  std::span<const double> edges() const noexcept { return edges_; }
  double min() const noexcept { return edges_.front(); }
  double max() const noexcept { return edges_.back(); }
  double lower(std::size_t bin) const { return edges_.at(bin); }
  double upper(std::size_t bin) const { return edges_.at(bin + 1); }

  /// Bin of `v`, clamped into [0, K-1] for values outside the range.
  std::size_t index_of(double v) const noexcept;

  bool operator==(const Binning&) const = default;

private:
  std::string feature_;
  std::vector<double> edges_;
};

/// Throws SchemaError for categorical features or bins < 2.
Binning make_binning(const FeatureSpec& spec, std::size_t bins);

} // namespace fairprobe
