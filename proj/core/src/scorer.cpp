#include "fairprobe/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "fairprobe/error.hpp"

namespace fairprobe {

void ScorerConfig::validate() const {
  if (!(error_threshold > 0.0 && error_threshold < 1.0)) {
    throw ConfigError("error threshold must lie in (0, 1)");
  }
  if (!(z > 0.0)) {
    throw ConfigError("z must be positive");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError("confidence must lie in (0, 1)");
  }
  if (sample_threshold < 1) {
    throw ConfigError("sample threshold must be at least 1");
  }
  if (max_samples < sample_threshold) {
    throw ConfigError("max_samples must be at least the sample threshold");
  }
  if (block_size < 1) {
    throw ConfigError("block size must be at least 1");
  }
}

double margin_of_error(double phi, std::size_t num, double z) {
  if (num == 0) {
    return 0.0;
  }
  const double variance = phi * (1.0 - phi);
  return z * std::sqrt(std::max(0.0, variance) / static_cast<double>(num));
}

FairnessReport make_report(RuleSet rules, std::size_t favorable_inside, std::size_t favorable_outside,
                           std::size_t num, const ScorerConfig& config, bool converged) {
  FairnessReport r{std::move(rules)};
  r.samples = num;
  r.favorable_inside = favorable_inside;
  r.favorable_outside = favorable_outside;
  if (num > 0) {
    r.phi_inside = static_cast<double>(favorable_inside) / static_cast<double>(num);
    r.phi_outside = static_cast<double>(favorable_outside) / static_cast<double>(num);
  }
  r.score = std::abs(r.phi_inside - r.phi_outside);
  r.margin_inside = margin_of_error(r.phi_inside, num, config.z);
  r.margin_outside = margin_of_error(r.phi_outside, num, config.z);
  r.margin = r.margin_inside + r.margin_outside;
  r.confidence = config.confidence * config.confidence;
  r.converged = converged;
  return r;
}

namespace {

template <class Sample, class Sampler>
FairnessReport score(PredictionOracle<Sample>& oracle, const Sampler& sampler, const Label& favorable,
                     const ScorerConfig& config) {
  config.validate();
  const auto& rules = sampler.rule_set();
  Rng inside_rng(derive_seed(config.seed, {sampler_stream_seed(sampler.seed(), rules, Side::inside)}));
  Rng outside_rng(derive_seed(config.seed, {sampler_stream_seed(sampler.seed(), rules, Side::outside)}));

  std::size_t num = 0;
  std::size_t fav_in = 0;
  std::size_t fav_out = 0;
  std::vector<Sample> inside;
  std::vector<Sample> outside;
  while (true) {
    std::size_t block = config.block_size;
    if (num <= config.sample_threshold) {
      block = std::max(block, config.sample_threshold + 1 - num);
    }
    block = std::min(block, config.max_samples - num);
    inside.clear();
    outside.clear();
    for (std::size_t i = 0; i < block; ++i) {
      inside.push_back(sampler.draw(Side::inside, inside_rng));
      outside.push_back(sampler.draw(Side::outside, outside_rng));
    }
    std::vector<Label> in_labels;
    std::vector<Label> out_labels;
    try {
      in_labels = oracle.predict_batch(inside);
      out_labels = oracle.predict_batch(outside);
    } catch (const OracleError& e) {
      throw OracleError("scoring " + rules.render() + " failed after " + std::to_string(num) +
                        " sample pairs: " + e.what());
    }
    if (in_labels.size() != block || out_labels.size() != block) {
      throw OracleError("oracle returned the wrong number of labels while scoring " + rules.render());
    }
    for (std::size_t i = 0; i < block; ++i) {
      ++num;
      fav_in += in_labels[i] == favorable ? 1 : 0;
      fav_out += out_labels[i] == favorable ? 1 : 0;
      if (num > config.sample_threshold) {
        const double phi_in = static_cast<double>(fav_in) / static_cast<double>(num);
        const double phi_out = static_cast<double>(fav_out) / static_cast<double>(num);
        const double eps = margin_of_error(phi_in, num, config.z) + margin_of_error(phi_out, num, config.z);
        if (eps <= config.error_threshold) {
          return make_report(rules, fav_in, fav_out, num, config, true);
        }
      }
    }
    if (num >= config.max_samples) {
      return make_report(rules, fav_in, fav_out, num, config, false);
    }
  }
}

} // namespace

FairnessReport group_fairness_score(StructuredOracle& oracle, const StructuredSampler& sampler,
                                    const Label& favorable, const ScorerConfig& config) {
  return score(oracle, sampler, favorable, config);
}

FairnessReport group_fairness_score(TextOracle& oracle, const TextSampler& sampler, const Label& favorable,
                                    const ScorerConfig& config) {
  return score(oracle, sampler, favorable, config);
}

std::vector<RankedFinding> Ranking::top() const {
  const auto n = std::min(top_k, ranked.size());
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<RankedFinding> Ranking::flagged() const {
  std::vector<RankedFinding> out;
  std::copy_if(ranked.begin(), ranked.end(), std::back_inserter(out),
               [](const RankedFinding& f) { return f.discriminatory; });
  return out;
}

Ranking rank_rule_sets(std::vector<FairnessReport> reports, double tolerance, std::size_t top_k) {
  std::sort(reports.begin(), reports.end(), [](const FairnessReport& a, const FairnessReport& b) {
    if (a.score != b.score) {
      return a.score > b.score;
    }
    return a.rule_set < b.rule_set;
  });
  Ranking ranking{tolerance, top_k, {}};
  for (auto& r : reports) {
    const bool flagged = r.score > tolerance;
    ranking.ranked.push_back({std::move(r), flagged});
  }
  return ranking;
}

} // namespace fairprobe
