#include "fairprobe/rules.hpp"

#include <algorithm>

#include "fairprobe/dataset.hpp"
#include "fairprobe/error.hpp"
#include "json_codec.hpp"

namespace fairprobe {

namespace {

void require_sensitive(const FeatureSchema& schema, std::size_t feature) {
  if (feature >= schema.size()) {
    throw RuleError("feature index " + std::to_string(feature) + " out of range");
  }
  if (!schema.feature(feature).sensitive) {
    throw RuleError("feature '" + schema.feature(feature).name + "' is not sensitive");
  }
}

template <class T>
auto compare_vectors(const std::vector<T>& a, const std::vector<T>& b) {
  return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace

Rule Rule::categorical(const FeatureSchema& schema, std::size_t feature, std::vector<std::size_t> values) {
  require_sensitive(schema, feature);
  const auto& spec = schema.feature(feature);
  if (!spec.is_categorical()) {
    throw RuleError("feature '" + spec.name + "' is not categorical");
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const auto domain = spec.categorical().values.size();
  if (values.empty() || values.size() >= domain) {
    throw RuleError("rule on '" + spec.name + "' must use a non-empty proper subset of its values");
  }
  if (values.back() >= domain) {
    throw RuleError("value index out of range for '" + spec.name + "'");
  }
  CategoricalIn rule{feature, spec.name, std::move(values), {}};
  for (auto v : rule.values) {
    rule.value_names.push_back(spec.categorical().values[v]);
  }
  return Rule(std::move(rule));
}

Rule Rule::interval(const FeatureSchema& schema, std::size_t feature, std::shared_ptr<const Binning> binning,
                    std::size_t first_bin, std::size_t last_bin) {
  require_sensitive(schema, feature);
  const auto& spec = schema.feature(feature);
  if (!spec.is_continuous()) {
    throw RuleError("feature '" + spec.name + "' is not continuous");
  }
  if (!binning || binning->feature() != spec.name) {
    throw RuleError("interval rule on '" + spec.name + "' needs that feature's binning");
  }
  const auto k = binning->bins();
  if (first_bin > last_bin || last_bin >= k) {
    throw RuleError("bin range out of order or out of range for '" + spec.name + "'");
  }
  if (first_bin == 0 && last_bin == k - 1) {
    throw RuleError("interval rule on '" + spec.name + "' may not span the full range");
  }
  return Rule(IntervalUnion{feature, std::move(binning), first_bin, last_bin});
}

Rule Rule::term(const Lexicon& lexicon, std::string_view term) {
  auto category = lexicon.category_of(term);
  if (!category) {
    throw RuleError("'" + std::string(term) + "' is not a lexicon term");
  }
  return Rule(ContainsTerm{*category, lexicon.category(*category).name, std::string(term)});
}

std::size_t Rule::slot() const noexcept {
  return std::visit(
      [](const auto& r) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ContainsTerm>) {
          return r.category;
        } else {
          return r.feature;
        }
      },
      payload_);
}

bool Rule::satisfied_by(std::span<const double> sample) const {
  if (const auto* cat = std::get_if<CategoricalIn>(&payload_)) {
    if (cat->feature >= sample.size()) {
      throw RuleError("sample has no feature '" + cat->feature_name + "'");
    }
    const double v = sample[cat->feature];
    if (v < 0) {
      return false;
    }
    return std::binary_search(cat->values.begin(), cat->values.end(), static_cast<std::size_t>(v));
  }
  if (const auto* iv = std::get_if<IntervalUnion>(&payload_)) {
    if (iv->feature >= sample.size()) {
      throw RuleError("sample has no feature '" + iv->binning->feature() + "'");
    }
    const auto bin = iv->binning->index_of(sample[iv->feature]);
    return bin >= iv->first_bin && bin <= iv->last_bin;
  }
  throw RuleError("text rule applied to a structured sample");
}

bool Rule::satisfied_by_categories(std::uint64_t category_mask) const {
  const auto* t = std::get_if<ContainsTerm>(&payload_);
  if (!t) {
    throw RuleError("structured rule applied to a document");
  }
  return (category_mask >> t->category) & 1U;
}

std::string Rule::render() const {
  if (const auto* cat = std::get_if<CategoricalIn>(&payload_)) {
    if (cat->value_names.size() == 1) {
      return cat->feature_name + "=" + cat->value_names.front();
    }
    std::string out = cat->feature_name + "∈{";
    for (std::size_t i = 0; i < cat->value_names.size(); ++i) {
      out += (i ? ", " : "") + cat->value_names[i];
    }
    return out + "}";
  }
  if (const auto* iv = std::get_if<IntervalUnion>(&payload_)) {
    const auto& b = *iv->binning;
    const bool closed = iv->last_bin == b.bins() - 1;
    return format_number(b.lower(iv->first_bin)) + "≤" + b.feature() + (closed ? "≤" : "<") +
           format_number(b.upper(iv->last_bin));
  }
  return "\"" + std::get<ContainsTerm>(payload_).term + "\"";
}

std::strong_ordering Rule::operator<=>(const Rule& other) const {
  if (auto c = slot() <=> other.slot(); c != 0) {
    return c;
  }
  if (auto c = payload_.index() <=> other.payload_.index(); c != 0) {
    return c;
  }
  if (const auto* a = std::get_if<CategoricalIn>(&payload_)) {
    const auto& b = std::get<CategoricalIn>(other.payload_);
    return compare_vectors(a->values, b.values);
  }
  if (const auto* a = std::get_if<IntervalUnion>(&payload_)) {
    const auto& b = std::get<IntervalUnion>(other.payload_);
    if (auto c = a->first_bin <=> b.first_bin; c != 0) {
      return c;
    }
    if (auto c = a->last_bin <=> b.last_bin; c != 0) {
      return c;
    }
    if (a->binning == b.binning || *a->binning == *b.binning) {
      return std::strong_ordering::equal;
    }
    return compare_vectors(std::vector<double>(a->binning->edges().begin(), a->binning->edges().end()),
                           std::vector<double>(b.binning->edges().begin(), b.binning->edges().end())) < 0
               ? std::strong_ordering::less
               : std::strong_ordering::greater;
  }
  const auto& a = std::get<ContainsTerm>(payload_);
  const auto& b = std::get<ContainsTerm>(other.payload_);
  return a.term.compare(b.term) <=> 0;
}

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) {
    throw RuleError("rule set is empty");
  }
  std::sort(rules_.begin(), rules_.end());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].is_text() != rules_.front().is_text()) {
      throw RuleError("rule set mixes text and structured rules");
    }
    if (i > 0 && rules_[i].slot() == rules_[i - 1].slot()) {
      throw RuleError("rule set has two rules on the same " +
                      std::string(rules_[i].is_text() ? "category" : "feature"));
    }
  }
}

bool RuleSet::satisfied_by(std::span<const double> sample) const {
  return std::all_of(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.satisfied_by(sample); });
}

bool RuleSet::satisfied_by_categories(std::uint64_t category_mask) const {
  return std::all_of(rules_.begin(), rules_.end(),
                     [&](const Rule& r) { return r.satisfied_by_categories(category_mask); });
}

std::string RuleSet::render() const {
  std::string out;
  for (const auto& r : rules_) {
    if (!out.empty()) {
      out += " ∧ ";
    }
    out += r.render();
  }
  return out;
}

std::uint64_t RuleSet::fingerprint() const {
  // FNV-1a
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : render()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::strong_ordering RuleSet::operator<=>(const RuleSet& other) const {
  return std::lexicographical_compare_three_way(rules_.begin(), rules_.end(), other.rules_.begin(),
                                                other.rules_.end());
}

namespace detail {

using nlohmann::json;

json rule_to_json(const Rule& rule) {
  if (const auto* cat = std::get_if<CategoricalIn>(&rule.payload())) {
    return {{"kind", "categorical"},
            {"feature", cat->feature_name},
            {"index", cat->feature},
            {"values", cat->value_names},
            {"value_indices", cat->values}};
  }
  if (const auto* iv = std::get_if<IntervalUnion>(&rule.payload())) {
    const auto& b = *iv->binning;
    return {{"kind", "interval"},
            {"feature", b.feature()},
            {"index", iv->feature},
            {"lo", b.lower(iv->first_bin)},
            {"hi", b.upper(iv->last_bin)},
            {"closed_upper", iv->last_bin == b.bins() - 1},
            {"first_bin", iv->first_bin},
            {"last_bin", iv->last_bin},
            {"bins", b.bins()},
            {"range", {b.min(), b.max()}}};
  }
  const auto& t = std::get<ContainsTerm>(rule.payload());
  return {{"kind", "term"}, {"category", t.category_name}, {"category_index", t.category}, {"term", t.term}};
}

Rule rule_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "categorical") {
    CategoricalIn r;
    r.feature = j.at("index").get<std::size_t>();
    r.feature_name = j.at("feature").get<std::string>();
    r.values = j.at("value_indices").get<std::vector<std::size_t>>();
    r.value_names = j.at("values").get<std::vector<std::string>>();
    if (r.values.empty() || r.values.size() != r.value_names.size()) {
      throw RuleError("categorical rule needs matching values and value_indices");
    }
    return Rule(std::move(r));
  }
  if (kind == "interval") {
    const auto range = j.at("range").get<std::vector<double>>();
    if (range.size() != 2) {
      throw RuleError("interval rule range must have two entries");
    }
    auto binning = std::make_shared<const Binning>(j.at("feature").get<std::string>(), range[0], range[1],
                                                   j.at("bins").get<std::size_t>());
    IntervalUnion r{j.at("index").get<std::size_t>(), std::move(binning), j.at("first_bin").get<std::size_t>(),
                    j.at("last_bin").get<std::size_t>()};
    if (r.first_bin > r.last_bin || r.last_bin >= r.binning->bins()) {
      throw RuleError("interval rule bin range invalid");
    }
    return Rule(std::move(r));
  }
  if (kind == "term") {
    return Rule(ContainsTerm{j.at("category_index").get<std::size_t>(), j.at("category").get<std::string>(),
                             j.at("term").get<std::string>()});
  }
  throw RuleError("unknown rule kind '" + kind + "'");
}

json rule_set_to_json(const RuleSet& rules) {
  json out = json::array();
  for (const auto& r : rules.rules()) {
    out.push_back(rule_to_json(r));
  }
  return out;
}

RuleSet rule_set_from_json(const json& j) {
  std::vector<Rule> rules;
  for (const auto& r : j) {
    rules.push_back(rule_from_json(r));
  }
  return RuleSet(std::move(rules));
}

} // namespace detail

std::string rule_set_to_json(const RuleSet& rules) {
  return detail::rule_set_to_json(rules).dump();
}

RuleSet rule_set_from_json(std::string_view text) {
  try {
    return detail::rule_set_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw RuleError(std::string("malformed rule set JSON: ") + e.what());
  }
}

} // namespace fairprobe
