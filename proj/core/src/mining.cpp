#include "fairprobe/mining.hpp"

#include <algorithm>
#include <bit>
#include <functional>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

constexpr std::size_t max_categorical_values = 24;

void truncate(std::vector<Rule>& rules, const RuleGenerationOptions& options) {
  if (options.max_rules_per_feature && rules.size() > *options.max_rules_per_feature) {
    rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(*options.max_rules_per_feature), rules.end());
  }
}

/// Row membership as a packed bit vector.
class Bits {
public:
  explicit Bits(std::size_t n, bool fill = false) : n_(n), words_((n + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
    if (fill && n % 64) {
      words_.back() = (std::uint64_t{1} << (n % 64)) - 1;
    }
  }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  Bits operator&(const Bits& o) const {
    Bits out(n_);
    for (std::size_t w = 0; w < words_.size(); ++w) {
      out.words_[w] = words_[w] & o.words_[w];
    }
    return out;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) {
      c += static_cast<std::size_t>(std::popcount(w));
    }
    return c;
  }

private:
  std::size_t n_;
  std::vector<std::uint64_t> words_;
};

MiningResult mine(const std::vector<std::vector<Rule>>& groups, std::size_t total,
                  const std::function<bool(std::size_t row, const Rule&)>& satisfies, const MiningOptions& options) {
  if (!(options.theta > 0.0 && options.theta < 1.0)) {
    throw RuleError("support threshold must lie in (0, 1)");
  }
  if (groups.empty()) {
    throw RuleError("no sensitive features to build rules from");
  }
  if (total == 0) {
    throw DataError("cannot mine rule sets on an empty dataset");
  }
  if (options.max_rules_per_set && *options.max_rules_per_set == 0) {
    throw RuleError("max_rules_per_set must be at least 1");
  }

  MiningResult result{};
  std::vector<std::size_t> sizes;
  std::vector<std::vector<Bits>> bits(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    sizes.push_back(groups[g].size());
    result.single_rules += groups[g].size();
    for (const auto& rule : groups[g]) {
      Bits b(total);
      for (std::size_t row = 0; row < total; ++row) {
        if (satisfies(row, rule)) {
          b.set(row);
        }
      }
      bits[g].push_back(std::move(b));
    }
  }
  result.candidates = count_candidate_rule_sets(sizes, options.max_rules_per_set);
  const std::size_t limit = options.max_rules_per_set.value_or(groups.size());

  std::vector<Rule> chosen;
  std::function<void(std::size_t, const Bits&)> extend = [&](std::size_t first_group, const Bits& covered) {
    for (std::size_t g = first_group; g < groups.size(); ++g) {
      for (std::size_t r = 0; r < groups[g].size(); ++r) {
        Bits next = covered & bits[g][r];
        ++result.evaluated;
        const auto count = next.count();
        if (static_cast<double>(count) / static_cast<double>(total) < options.theta) {
          continue; // every superset is at most as frequent
        }
        chosen.push_back(groups[g][r]);
        RuleSet set(chosen);
        if (count == total) {
          result.skipped_empty_complement.push_back(set);
        } else {
          result.frequent.push_back({set, static_cast<double>(count) / static_cast<double>(total), count, total});
        }
        if (chosen.size() < limit) {
          extend(g + 1, next);
        }
        chosen.pop_back();
      }
    }
  };
  extend(0, Bits(total, true));

  std::sort(result.frequent.begin(), result.frequent.end(),
            [](const SupportResult& a, const SupportResult& b) { return a.rule_set < b.rule_set; });
  std::sort(result.skipped_empty_complement.begin(), result.skipped_empty_complement.end());
  return result;
}

} // namespace

std::vector<Rule> single_feature_rules(const FeatureSchema& schema, std::size_t feature,
                                       const RuleGenerationOptions& options) {
  if (feature >= schema.size()) {
    throw RuleError("feature index out of range");
  }
  const auto& spec = schema.feature(feature);
  if (!spec.sensitive) {
    throw RuleError("feature '" + spec.name + "' is not sensitive");
  }
  std::vector<Rule> rules;
  if (spec.is_categorical()) {
    const auto n = spec.categorical().values.size();
    if (n > max_categorical_values) {
      throw RuleError("feature '" + spec.name + "' has too many values to enumerate subsets");
    }
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      std::vector<std::size_t> values;
      for (std::size_t v = 0; v < n; ++v) {
        if ((mask >> v) & 1U) {
          values.push_back(v);
        }
      }
      rules.push_back(Rule::categorical(schema, feature, std::move(values)));
    }
    std::sort(rules.begin(), rules.end());
  } else {
    auto binning = std::make_shared<const Binning>(make_binning(spec, options.bins));
    const auto k = binning->bins();
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t last = options.interval_mode == IntervalMode::single_bin ? a : k - 1;
      for (std::size_t b = a; b <= last; ++b) {
        if (a == 0 && b == k - 1) {
          continue;
        }
        rules.push_back(Rule::interval(schema, feature, binning, a, b));
      }
    }
  }
  truncate(rules, options);
  return rules;
}

std::vector<Rule> single_feature_rules(const Lexicon& lexicon, std::size_t category,
                                       const RuleGenerationOptions& options) {
  std::vector<Rule> rules;
  for (const auto& term : lexicon.category(category).terms) {
    rules.push_back(Rule::term(lexicon, term));
  }
  truncate(rules, options);
  return rules;
}

std::vector<std::vector<Rule>> rule_groups(const FeatureSchema& schema, const RuleGenerationOptions& options) {
  std::vector<std::vector<Rule>> groups;
  for (auto i : schema.sensitive_indices()) {
    groups.push_back(single_feature_rules(schema, i, options));
  }
  return groups;
}

std::vector<std::vector<Rule>> rule_groups(const Lexicon& lexicon, const RuleGenerationOptions& options) {
  std::vector<std::vector<Rule>> groups;
  for (std::size_t c = 0; c < lexicon.size(); ++c) {
    groups.push_back(single_feature_rules(lexicon, c, options));
  }
  return groups;
}

std::uint64_t count_candidate_rule_sets(std::span<const std::size_t> rules_per_group,
                                        std::optional<std::size_t> max_rules_per_set) {
  // ways[j] = number of ways to pick exactly j rules from the groups seen so far
  std::vector<std::uint64_t> ways(rules_per_group.size() + 1, 0);
  ways[0] = 1;
  for (std::size_t g = 0; g < rules_per_group.size(); ++g) {
    for (std::size_t j = g + 1; j >= 1; --j) {
      ways[j] += ways[j - 1] * rules_per_group[g];
    }
  }
  const auto limit = std::min(max_rules_per_set.value_or(rules_per_group.size()), rules_per_group.size());
  std::uint64_t total = 0;
  for (std::size_t j = 1; j <= limit; ++j) {
    total += ways[j];
  }
  return total;
}

std::vector<RuleSet> candidate_rule_sets(std::span<const std::vector<Rule>> groups,
                                         std::optional<std::size_t> max_rules_per_set) {
  std::vector<RuleSet> out;
  const std::size_t limit = max_rules_per_set.value_or(groups.size());
  std::vector<Rule> chosen;
  std::function<void(std::size_t)> walk = [&](std::size_t g) {
    if (g == groups.size()) {
      if (!chosen.empty()) {
        out.emplace_back(chosen);
      }
      return;
    }
    walk(g + 1);
    if (chosen.size() < limit) {
      for (const auto& rule : groups[g]) {
        chosen.push_back(rule);
        walk(g + 1);
        chosen.pop_back();
      }
    }
  };
  walk(0);
  std::sort(out.begin(), out.end());
  return out;
}

SupportResult support(const StructuredDataset& data, const RuleSet& rules) {
  if (data.empty()) {
    throw DataError("support of an empty dataset is undefined");
  }
  std::size_t count = 0;
  for (const auto& row : data.rows()) {
    count += rules.satisfied_by(row.features) ? 1 : 0;
  }
  return {rules, static_cast<double>(count) / static_cast<double>(data.size()), count, data.size()};
}

SupportResult support(const TextDataset& data, const RuleSet& rules) {
  if (data.empty()) {
    throw DataError("support of an empty dataset is undefined");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    count += rules.satisfied_by_categories(data.categories_of(i)) ? 1 : 0;
  }
  return {rules, static_cast<double>(count) / static_cast<double>(data.size()), count, data.size()};
}

MiningResult frequent_rule_sets(const StructuredDataset& data, const MiningOptions& options) {
  const auto groups = rule_groups(data.schema(), options.rules);
  return mine(
      groups, data.size(),
      [&](std::size_t row, const Rule& rule) { return rule.satisfied_by(data.row(row).features); }, options);
}

MiningResult frequent_rule_sets(const TextDataset& data, const MiningOptions& options) {
  const auto groups = rule_groups(data.lexicon(), options.rules);
  return mine(
      groups, data.size(),
      [&](std::size_t row, const Rule& rule) { return rule.satisfied_by_categories(data.categories_of(row)); },
      options);
}

} // namespace fairprobe
