#include "fairprobe/binning.hpp"

#include <cmath>

#include "fairprobe/error.hpp"

namespace fairprobe {

Binning::Binning(std::string feature, double min, double max, std::size_t bins) : feature_(std::move(feature)) {
  if (bins < 2) {
    throw SchemaError("binning of '" + feature_ + "' needs at least 2 intervals");
  }
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw SchemaError("binning of '" + feature_ + "' needs finite min < max");
  }
  edges_.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) {
    edges_[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(bins);
  }
  edges_[bins] = max;
}

std::size_t Binning::index_of(double v) const noexcept {
  const std::size_t k = bins();
  if (!(v > edges_.front())) {
    return 0;
  }
  if (v >= edges_.back()) {
    return k - 1;
  }
  const double width = (edges_.back() - edges_.front()) / static_cast<double>(k);
  auto guess = static_cast<std::size_t>(std::floor((v - edges_.front()) / width));
  if (guess > k - 1) {
    guess = k - 1;
  }
  // settle against the stored edges so index_of agrees with lower()/upper()
  while (guess > 0 && v < edges_[guess]) {
    --guess;
  }
  while (guess < k - 1 && v >= edges_[guess + 1]) {
    ++guess;
  }
  return guess;
}

Binning make_binning(const FeatureSpec& spec, std::size_t bins) {
  if (!spec.is_continuous()) {
    throw SchemaError("cannot bin categorical feature '" + spec.name + "'");
  }
  const auto& c = spec.continuous();
  return Binning(spec.name, c.min, c.max, bins);
}

} // namespace fairprobe
