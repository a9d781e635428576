#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/random.hpp"
#include "fairprobe/rules.hpp"
#include "fairprobe/text.hpp"

namespace fairprobe {

/// Which group a draw comes from: samples satisfying the rule set, or the rest.
enum class Side { inside, outside };

struct SamplerConfig {
  double integer_step = 1.0;  ///< perturbation size for integer features
  double decimal_step = 0.01; ///< perturbation size for decimal features
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stream seed for one (rule set, side) pair; independent of scheduling.
std::uint64_t sampler_stream_seed(std::uint64_t seed, const RuleSet& rules, Side side);

/// Seed-plus-perturbation generator for structured data.
///
/// A draw picks a uniform seed row on the requested side (with replacement),
/// then a uniform non-sensitive continuous feature, and moves it one step in a
/// random direction, clamped to the feature's domain. Sensitive features are
/// never touched, so group membership is preserved. Without any non-sensitive
/// continuous feature the seed is returned as is.
class StructuredSampler {
public:
  StructuredSampler(const StructuredDataset& data, RuleSet rules, SamplerConfig config);

  const RuleSet& rule_set() const noexcept { return rules_; }
  const StructuredDataset& dataset() const noexcept { return *data_; }
  const SamplerConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return config_.seed; }
  std::size_t seed_count(Side side) const noexcept;

  /// Throws SamplingError when the side has no seed row.
  FeatureVector draw(Side side, Rng& rng) const;

  /// x[feature] + direction * step, clamped to the domain.
  static FeatureVector perturb(const FeatureSchema& schema, FeatureVector seed, std::size_t feature, int direction,
                               const SamplerConfig& config);

private:
  const StructuredDataset* data_;
  RuleSet rules_;
  SamplerConfig config_;
  std::vector<std::size_t> inside_;
  std::vector<std::size_t> outside_;
  std::vector<std::size_t> perturbable_;
};

/// Term-replacement generator for text.
///
/// Inside draws pick a uniform seed document holding at least one term of
/// every rule's category and rewrite each such term to the rule's term.
/// Outside draws return a uniform document that fails the rule set at
/// category level, unmodified.
class TextSampler {
public:
  TextSampler(const TextDataset& data, RuleSet rules, std::uint64_t seed = 0);

  const RuleSet& rule_set() const noexcept { return rules_; }
  const TextDataset& dataset() const noexcept { return *data_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t seed_count(Side side) const noexcept;

  TokenSequence draw(Side side, Rng& rng) const;

  /// Replaces every occurrence of a term in a rule's category by that rule's
  /// term. Multi-token terms are replaced as units.
  static TokenSequence replace_terms(const TokenSequence& tokens, const RuleSet& rules, const Lexicon& lexicon);

private:
  const TextDataset* data_;
  RuleSet rules_;
  std::uint64_t seed_ = 0;
  std::vector<std::size_t> inside_;
  std::vector<std::size_t> outside_;
};

FeatureVector sample_structured(const StructuredDataset& data, const RuleSet& rules, Side side,
                                const SamplerConfig& config, Rng& rng);
TokenSequence sample_text(const TextDataset& data, const RuleSet& rules, Rng& rng);
TokenSequence sample_text_complement(const TextDataset& data, const RuleSet& rules, Rng& rng);

} // namespace fairprobe
