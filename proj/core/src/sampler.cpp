#include "fairprobe/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fairprobe/error.hpp"

namespace fairprobe {

void SamplerConfig::validate() const {
  if (!(integer_step > 0.0) || !(decimal_step > 0.0)) {
    throw ConfigError("perturbation steps must be positive");
  }
}

std::uint64_t sampler_stream_seed(std::uint64_t seed, const RuleSet& rules, Side side) {
  return derive_seed(seed, {rules.fingerprint(), side == Side::inside ? 1U : 2U});
}

StructuredSampler::StructuredSampler(const StructuredDataset& data, RuleSet rules, SamplerConfig config)
    : data_(&data), rules_(std::move(rules)), config_(config) {
  config_.validate();
  if (rules_.is_text()) {
    throw RuleError("structured sampler needs a structured rule set");
  }
  for (std::size_t r = 0; r < data.size(); ++r) {
    (rules_.satisfied_by(data.row(r).features) ? inside_ : outside_).push_back(r);
  }
  const auto& schema = data.schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!schema.feature(i).sensitive && schema.feature(i).is_continuous()) {
      perturbable_.push_back(i);
    }
  }
}

std::size_t StructuredSampler::seed_count(Side side) const noexcept {
  return side == Side::inside ? inside_.size() : outside_.size();
}

FeatureVector StructuredSampler::perturb(const FeatureSchema& schema, FeatureVector seed, std::size_t feature,
                                         int direction, const SamplerConfig& config) {
  const auto& spec = schema.feature(feature);
  if (spec.sensitive || !spec.is_continuous()) {
    throw SamplingError("feature '" + spec.name + "' cannot be perturbed");
  }
  const auto& domain = spec.continuous();
  const double step = domain.integer ? config.integer_step : config.decimal_step;
  double v = seed[feature] + static_cast<double>(direction) * step;
  if (!domain.integer) {
    // keep decimal steps on the step grid (0.50 - 0.01 is 0.49, not 0.48999...)
    const double snapped = std::round(v / step) * step;
    if (std::abs(snapped - v) < step * 1e-6) {
      v = std::round(snapped * 1e12) / 1e12;
    }
  }
  seed[feature] = std::clamp(v, domain.min, domain.max);
  return seed;
}

FeatureVector StructuredSampler::draw(Side side, Rng& rng) const {
  const auto& pool = side == Side::inside ? inside_ : outside_;
  if (pool.empty()) {
    throw SamplingError("no seed row " + std::string(side == Side::inside ? "satisfies" : "violates") + " " +
                        rules_.render());
  }
  const auto& seed = data_->row(pool[rng.uniform_index(pool.size())]).features;
  if (perturbable_.empty()) {
    return seed;
  }
  const auto feature = perturbable_[rng.uniform_index(perturbable_.size())];
  return perturb(data_->schema(), seed, feature, rng.sign(), config_);
}

TextSampler::TextSampler(const TextDataset& data, RuleSet rules, std::uint64_t seed)
    : data_(&data), rules_(std::move(rules)), seed_(seed) {
  if (!rules_.is_text()) {
    throw RuleError("text sampler needs a text rule set");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    (rules_.satisfied_by_categories(data.categories_of(i)) ? inside_ : outside_).push_back(i);
  }
}

std::size_t TextSampler::seed_count(Side side) const noexcept {
  return side == Side::inside ? inside_.size() : outside_.size();
}

TokenSequence TextSampler::replace_terms(const TokenSequence& tokens, const RuleSet& rules, const Lexicon& lexicon) {
  std::map<std::size_t, const ContainsTerm*> by_category;
  for (const auto& r : rules.rules()) {
    const auto& t = std::get<ContainsTerm>(r.payload());
    by_category[t.category] = &t;
  }
  TokenSequence out;
  out.reserve(tokens.size());
  std::size_t next = 0;
  for (const auto& m : find_terms(tokens, lexicon)) {
    auto it = by_category.find(m.category);
    if (it == by_category.end()) {
      continue;
    }
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(next),
               tokens.begin() + static_cast<std::ptrdiff_t>(m.position));
    const auto replacement = tokenize(it->second->term);
    out.insert(out.end(), replacement.begin(), replacement.end());
    next = m.position + m.length;
  }
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(next), tokens.end());
  return out;
}

TokenSequence TextSampler::draw(Side side, Rng& rng) const {
  const auto& pool = side == Side::inside ? inside_ : outside_;
  if (pool.empty()) {
    throw SamplingError(side == Side::inside ? "no document holds a term of every category in " + rules_.render()
                                             : "every document satisfies " + rules_.render());
  }
  const auto& doc = data_->document(pool[rng.uniform_index(pool.size())]);
  if (side == Side::outside) {
    return doc.tokens;
  }
  return replace_terms(doc.tokens, rules_, data_->lexicon());
}

FeatureVector sample_structured(const StructuredDataset& data, const RuleSet& rules, Side side,
                                const SamplerConfig& config, Rng& rng) {
  return StructuredSampler(data, rules, config).draw(side, rng);
}

TokenSequence sample_text(const TextDataset& data, const RuleSet& rules, Rng& rng) {
  return TextSampler(data, rules).draw(Side::inside, rng);
}

TokenSequence sample_text_complement(const TextDataset& data, const RuleSet& rules, Rng& rng) {
  return TextSampler(data, rules).draw(Side::outside, rng);
}

} // namespace fairprobe
