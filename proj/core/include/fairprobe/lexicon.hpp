#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairprobe {

/// Categories of identity-sensitive terms. Categories are kept in name order
/// and terms in lexicographic order, so indices are stable for a given
/// content. Terms are lowercase and may span several tokens ("middle aged").
class Lexicon {
public:
  struct Category {
    std::string name;
    std::vector<std::string> terms;

    bool operator==(const Category&) const = default;
  };

  static constexpr std::size_t max_categories = 64;

  /// Throws SchemaError when a category is empty or a term is shared.
  explicit Lexicon(const std::map<std::string, std::vector<std::string>>& categories);

  /// The 48 identity terms in four categories (age, gender, race, religion).
  static Lexicon builtin();

  const std::vector<Category>& categories() const noexcept { return categories_; }
  const Category& category(std::size_t i) const { return categories_.at(i); }
  std::size_t size() const noexcept { return categories_.size(); }
  std::size_t term_count() const noexcept;

  std::optional<std::size_t> category_index(std::string_view name) const;
  std::optional<std::size_t> category_of(std::string_view term) const;
  /// Longest term length in tokens.
  std::size_t max_term_tokens() const noexcept { return max_tokens_; }

  bool operator==(const Lexicon& other) const { return categories_ == other.categories_; }

private:
  std::vector<Category> categories_;
  std::map<std::string, std::size_t, std::less<>> term_to_category_;
  std::size_t max_tokens_ = 1;
};

Lexicon parse_lexicon_json(std::string_view json);
Lexicon load_lexicon(const std::filesystem::path& path);
std::string lexicon_to_json(const Lexicon& lexicon);

} // namespace fairprobe
