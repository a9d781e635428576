#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/rules.hpp"
#include "fairprobe/text.hpp"

namespace fairprobe {

/// How continuous features turn into rules: one rule per bin, or one rule
/// per contiguous run of bins.
enum class IntervalMode { single_bin, bin_union };

struct RuleGenerationOptions {
  std::size_t bins = 10;
  IntervalMode interval_mode = IntervalMode::bin_union;
  /// Keeps only the first N rules of each feature/category (canonical order).
  std::optional<std::size_t> max_rules_per_feature;
};

/// All single-feature rules of a sensitive feature: every non-empty proper
/// value subset (categorical) or every bin / contiguous bin run except the
/// full range (continuous). Throws RuleError for non-sensitive features.
std::vector<Rule> single_feature_rules(const FeatureSchema& schema, std::size_t feature,
                                       const RuleGenerationOptions& options = {});
/// One rule per term of the category.
std::vector<Rule> single_feature_rules(const Lexicon& lexicon, std::size_t category,
                                       const RuleGenerationOptions& options = {});

/// Rules grouped per sensitive feature (schema order) or per category.
std::vector<std::vector<Rule>> rule_groups(const FeatureSchema& schema, const RuleGenerationOptions& options = {});
std::vector<std::vector<Rule>> rule_groups(const Lexicon& lexicon, const RuleGenerationOptions& options = {});

/// Number of rule sets choosing at most one rule per group, non-empty, and
/// with at most `max_rules_per_set` rules.
std::uint64_t count_candidate_rule_sets(std::span<const std::size_t> rules_per_group,
                                        std::optional<std::size_t> max_rules_per_set = std::nullopt);

/// Every candidate combination, unfiltered, in canonical order.
std::vector<RuleSet> candidate_rule_sets(std::span<const std::vector<Rule>> groups,
                                         std::optional<std::size_t> max_rules_per_set = std::nullopt);

struct SupportResult {
  RuleSet rule_set;
  double support = 0.0;
  std::size_t satisfying = 0;
  std::size_t total = 0;

  bool operator==(const SupportResult&) const = default;
};

/// Exact support by scanning every row. Text uses category-level containment.
/// Throws DataError on an empty dataset.
SupportResult support(const StructuredDataset& data, const RuleSet& rules);
SupportResult support(const TextDataset& data, const RuleSet& rules);

struct MiningOptions {
  double theta = 0.05;
  RuleGenerationOptions rules;
  std::optional<std::size_t> max_rules_per_set;
};

struct MiningResult {
  std::vector<SupportResult> frequent; ///< canonical order
  std::size_t single_rules = 0;
  std::uint64_t candidates = 0; ///< size of the unpruned search space
  std::size_t evaluated = 0;    ///< support computations actually performed
  /// Frequent rule sets satisfied by every sample, dropped because the
  /// complement group would be empty.
  std::vector<RuleSet> skipped_empty_complement;
};

/// All rule sets with support >= theta and a non-empty complement. The
/// search extends rule sets one group at a time and never extends an
/// infrequent one; the output equals filtering the full candidate list.
/// Throws RuleError when there are no sensitive features or theta is not in
/// (0, 1).
MiningResult frequent_rule_sets(const StructuredDataset& data, const MiningOptions& options = {});
MiningResult frequent_rule_sets(const TextDataset& data, const MiningOptions& options = {});

} // namespace fairprobe
