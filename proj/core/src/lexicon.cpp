#include "fairprobe/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairprobe/error.hpp"
#include "fairprobe/text.hpp"

namespace fairprobe {

Lexicon::Lexicon(const std::map<std::string, std::vector<std::string>>& categories) {
  if (categories.empty()) {
    throw SchemaError("lexicon has no categories");
  }
  if (categories.size() > max_categories) {
    throw SchemaError("lexicon has more than 64 categories");
  }
  for (const auto& [name, terms] : categories) {
    if (terms.empty()) {
      throw SchemaError("lexicon category '" + name + "' is empty");
    }
    Category cat{name, {}};
    std::set<std::string> unique;
    for (const auto& raw : terms) {
      // normalize through the tokenizer so "African-American" == "african american"
      const auto tokens = tokenize(raw);
      if (tokens.empty()) {
        throw SchemaError("lexicon category '" + name + "' has an empty term");
      }
      std::string term;
      for (const auto& t : tokens) {
        term += term.empty() ? t : " " + t;
      }
      max_tokens_ = std::max(max_tokens_, tokens.size());
      unique.insert(term);
    }
    cat.terms.assign(unique.begin(), unique.end());
    const auto index = categories_.size();
    for (const auto& term : cat.terms) {
      if (!term_to_category_.emplace(term, index).second) {
        throw SchemaError("term '" + term + "' appears in more than one category");
      }
    }
    categories_.push_back(std::move(cat));
  }
}

Lexicon Lexicon::builtin() {
  return Lexicon({
      {"gender",
       {"lesbian", "gay", "bisexual", "transgender", "trans", "queer", "lgbt", "lgbtq", "homosexual", "straight",
        "heterosexual", "male", "female", "nonbinary"}},
      {"race",
       {"african", "african american", "black", "white", "european", "hispanic", "latino", "latina", "latinx",
        "mexican", "canadian", "american", "asian", "indian", "middle eastern", "chinese", "japanese"}},
      {"religion", {"christian", "muslim", "jewish", "buddhist", "catholic", "protestant", "sikh", "taoist", "atheist"}},
      {"age", {"old", "older", "young", "younger", "teenage", "millennial", "middle aged", "elderly"}},
  });
}

std::size_t Lexicon::term_count() const noexcept {
  return term_to_category_.size();
}

std::optional<std::size_t> Lexicon::category_index(std::string_view name) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> Lexicon::category_of(std::string_view term) const {
  auto it = term_to_category_.find(term);
  if (it == term_to_category_.end()) {
    return std::nullopt;
  }
  return it->second;
}

Lexicon parse_lexicon_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return Lexicon(j.get<std::map<std::string, std::vector<std::string>>>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed lexicon: ") + e.what());
  }
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("cannot open lexicon file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon_json(buf.str());
}

std::string lexicon_to_json(const Lexicon& lexicon) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : lexicon.categories()) {
    j[c.name] = c.terms;
  }
  return j.dump(2);
}

} // namespace fairprobe
