#include "fairprobe/text.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) {
      out += ' ';
    }
    out += t;
  }
  return out;
}

} // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

std::vector<TermMatch> find_terms(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::vector<TermMatch> matches;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    const auto longest = std::min(lexicon.max_term_tokens(), tokens.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      auto candidate = join(tokens.subspan(i, len));
      if (auto cat = lexicon.category_of(candidate)) {
        matches.push_back({i, len, *cat, std::move(candidate)});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      ++i;
    }
  }
  return matches;
}

std::uint64_t category_mask(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::uint64_t mask = 0;
  for (const auto& m : find_terms(tokens, lexicon)) {
    mask |= std::uint64_t{1} << m.category;
  }
  return mask;
}

bool contains_category(std::span<const std::string> tokens, std::size_t category, const Lexicon& lexicon) {
  return (category_mask(tokens, lexicon) >> category) & 1U;
}

bool contains_term(std::span<const std::string> tokens, std::string_view term, const Lexicon& lexicon) {
  const auto matches = find_terms(tokens, lexicon);
  return std::any_of(matches.begin(), matches.end(), [&](const TermMatch& m) { return m.term == term; });
}

TextDataset::TextDataset(Lexicon lexicon, std::vector<Document> documents)
    : lexicon_(std::move(lexicon)), documents_(std::move(documents)) {
  masks_.reserve(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& doc = documents_[i];
    if (doc.tokens.empty()) {
      throw DataError("document " + std::to_string(i) + " has no tokens");
    }
    if (doc.label.empty()) {
      throw DataError("document " + std::to_string(i) + " has no label");
    }
    masks_.push_back(category_mask(doc.tokens, lexicon_));
    if (std::find(labels_.begin(), labels_.end(), doc.label) == labels_.end()) {
      labels_.push_back(doc.label);
    }
  }
}

TextDataset parse_text(std::istream& in, const Lexicon& lexicon) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      throw DataError("empty document", line_no);
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("missing label (expected label<TAB>text)", line_no);
    }
    auto label = line.substr(0, tab);
    if (label.empty()) {
      throw DataError("missing label", line_no);
    }
    // an optional third field carries provenance and is dropped
    auto text = std::string_view(line).substr(tab + 1);
    if (auto second_tab = text.find('\t'); second_tab != std::string_view::npos) {
      text = text.substr(0, second_tab);
    }
    auto tokens = tokenize(text);
    if (tokens.empty()) {
      throw DataError("empty document", line_no);
    }
    docs.push_back({std::move(tokens), std::move(label)});
  }
  return TextDataset(lexicon, std::move(docs));
}

TextDataset load_text(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open text file " + path.string());
  }
  try {
    return parse_text(in, lexicon);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text(std::ostream& out, const TextDataset& data, std::optional<std::size_t> original_docs) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& doc = data.document(i);
    out << doc.label << '\t' << join(doc.tokens);
    if (original_docs) {
      out << '\t' << (i < *original_docs ? "original" : "augmented");
    }
    out << '\n';
  }
}

} // namespace fairprobe
