#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/lexicon.hpp"

namespace fairprobe {

using TokenSequence = std::vector<std::string>;

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words
/// survive intact.
TokenSequence tokenize(std::string_view text);

/// One occurrence of a lexicon term spanning `length` tokens.
struct TermMatch {
  std::size_t position = 0;
  std::size_t length = 1;
  std::size_t category = 0;
  std::string term;
};

/// Scans left to right, preferring the longest term that starts at each
/// position; matched tokens are consumed.
std::vector<TermMatch> find_terms(std::span<const std::string> tokens, const Lexicon& lexicon);

/// Bit i set iff the tokens contain at least one term of category i.
std::uint64_t category_mask(std::span<const std::string> tokens, const Lexicon& lexicon);

bool contains_category(std::span<const std::string> tokens, std::size_t category, const Lexicon& lexicon);
bool contains_term(std::span<const std::string> tokens, std::string_view term, const Lexicon& lexicon);

struct Document {
  TokenSequence tokens;
  std::string label;

  bool operator==(const Document&) const = default;
};

/// Immutable after construction; the per-document category masks are
/// computed once.
class TextDataset {
public:
  TextDataset(Lexicon lexicon, std::vector<Document> documents);

  const Lexicon& lexicon() const noexcept { return lexicon_; }
  std::span<const Document> documents() const noexcept { return documents_; }
  const Document& document(std::size_t i) const { return documents_.at(i); }
  std::uint64_t categories_of(std::size_t i) const { return masks_.at(i); }
  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }
  /// Distinct labels in first-seen order.
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  bool operator==(const TextDataset& other) const {
    return lexicon_ == other.lexicon_ && documents_ == other.documents_;
  }

private:
  Lexicon lexicon_;
  std::vector<Document> documents_;
  std::vector<std::uint64_t> masks_;
  std::vector<std::string> labels_;
};

/// One document per line: `label<TAB>text`. Blank lines are errors.
TextDataset parse_text(std::istream& in, const Lexicon& lexicon);
TextDataset load_text(const std::filesystem::path& path, const Lexicon& lexicon);

/// Writes `label<TAB>tokens joined by spaces`; with `original_docs` set a third
/// tab-separated origin field is appended.
void write_text(std::ostream& out, const TextDataset& data, std::optional<std::size_t> original_docs = std::nullopt);

} // namespace fairprobe
