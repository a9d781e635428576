#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairprobe/schema.hpp"
#include "fairprobe/text.hpp"

namespace fairprobe {

using Label = std::string;

/// The model under test as an opaque sample -> label function.
/// Implementations must be deterministic for the lifetime of the object and
/// safe to call from several threads.
template <class Sample>
class PredictionOracle {
public:
  virtual ~PredictionOracle() = default;

  virtual std::vector<Label> predict_batch(std::span<const Sample> samples) = 0;

  Label predict(const Sample& sample) { return predict_batch(std::span<const Sample>(&sample, 1)).front(); }
};

using StructuredOracle = PredictionOracle<FeatureVector>;
using TextOracle = PredictionOracle<TokenSequence>;

/// Adapts a plain function; handy for rule-based oracles and tests.
template <class Sample>
class FunctionOracle final : public PredictionOracle<Sample> {
public:
  explicit FunctionOracle(std::function<Label(const Sample&)> fn) : fn_(std::move(fn)) {}

  std::vector<Label> predict_batch(std::span<const Sample> samples) override {
    std::vector<Label> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
      out.push_back(fn_(s));
    }
    return out;
  }

private:
  std::function<Label(const Sample&)> fn_;
};

} // namespace fairprobe
