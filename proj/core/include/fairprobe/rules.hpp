#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairprobe/binning.hpp"
#include "fairprobe/lexicon.hpp"
#include "fairprobe/schema.hpp"

namespace fairprobe {

/// feature ∈ {values}; a non-empty proper subset of the feature's domain.
struct CategoricalIn {
  std::size_t feature = 0;
  std::string feature_name;
  std::vector<std::size_t> values; ///< sorted domain indices
  std::vector<std::string> value_names;
};

/// lower(first_bin) <= feature < upper(last_bin), closed when last_bin is the
/// final bin. Never spans the full range.
struct IntervalUnion {
  std::size_t feature = 0;
  std::shared_ptr<const Binning> binning;
  std::size_t first_bin = 0;
  std::size_t last_bin = 0;
};

/// Text rule: the document contains `term` of lexicon category `category`.
struct ContainsTerm {
  std::size_t category = 0;
  std::string category_name;
  std::string term;
};

/// One interpretable constraint on a single sensitive feature or term
/// category. Construct through the validating factories.
class Rule {
public:
  using Payload = std::variant<CategoricalIn, IntervalUnion, ContainsTerm>;

  static Rule categorical(const FeatureSchema& schema, std::size_t feature, std::vector<std::size_t> values);
  static Rule interval(const FeatureSchema& schema, std::size_t feature, std::shared_ptr<const Binning> binning,
                       std::size_t first_bin, std::size_t last_bin);
  static Rule term(const Lexicon& lexicon, std::string_view term);

  /// Rebuilds a rule from already validated parts (deserialization).
  explicit Rule(Payload payload) : payload_(std::move(payload)) {}

  const Payload& payload() const noexcept { return payload_; }
  bool is_text() const noexcept { return std::holds_alternative<ContainsTerm>(payload_); }
  /// Feature index for structured rules, category index for text rules.
  std::size_t slot() const noexcept;

  /// Structured membership. Throws RuleError for text rules or a sample too
  /// short to hold the rule's feature.
  bool satisfied_by(std::span<const double> sample) const;
  /// Category-level text membership: the document holds any term of the
  /// rule's category. `category_mask` comes from fairprobe::category_mask.
  bool satisfied_by_categories(std::uint64_t category_mask) const;

  std::string render() const;

  std::strong_ordering operator<=>(const Rule& other) const;
  bool operator==(const Rule& other) const { return (*this <=> other) == 0; }

private:
  Payload payload_;
};

/// Conjunction of rules, at most one per feature (structured) or category
/// (text). Rules are kept sorted, which makes the canonical order of rule sets
/// plain lexicographic comparison.
class RuleSet {
public:
  /// Empty placeholder; only the vector constructor yields a usable set.
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules);

  std::span<const Rule> rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool is_text() const noexcept { return !rules_.empty() && rules_.front().is_text(); }

  bool satisfied_by(std::span<const double> sample) const;
  bool satisfied_by_categories(std::uint64_t category_mask) const;

  /// e.g. `gender=male ∧ 40≤age<80`
  std::string render() const;
  /// Stable 64-bit hash of the rendering; used to derive random streams.
  std::uint64_t fingerprint() const;

  std::strong_ordering operator<=>(const RuleSet& other) const;
  bool operator==(const RuleSet& other) const { return (*this <=> other) == 0; }

private:
  std::vector<Rule> rules_;
};

/// JSON array `[{feature, kind, values | lo/hi | term+category}, ...]` carrying
/// enough detail to rebuild the rule set without the schema.
std::string rule_set_to_json(const RuleSet& rules);
RuleSet rule_set_from_json(std::string_view json);

} // namespace fairprobe
