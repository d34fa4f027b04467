#include "argmap/textproc.hpp"

#include <algorithm>
#include <memory>

#include <json.hpp>
#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/ubrk.h>
#include <unicode/unistr.h>

#include "argmap/error.hpp"

namespace argmap {
namespace {

icu::BreakIterator& word_iterator() {
  thread_local std::unique_ptr<icu::BreakIterator> it = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> bi(
        icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !bi) {
      throw Error(std::string("ICU word break iterator unavailable: ") +
                  u_errorName(status));
    }
    return bi;
  }();
  return *it;
}

icu::UnicodeString to_unicode(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

// Words that end in "s" but are singular (or have no singular form).
const std::set<std::string, std::less<>> kInvariantWords = {
    "aids",     "alias",      "always",      "arkansas",  "athletics", "atlas",
    "bias",     "canvas",     "chaos",       "christmas", "does",      "economics",
    "ethics",   "gymnastics", "headquarters", "kansas",   "lens",      "mathematics",
    "means",    "news",       "perhaps",     "physics",   "politics",  "series",
    "species",  "texas",      "thus",        "whereas",   "sometimes", "was",
    "has",      "this",       "plus",        "olympics",
};

const std::set<std::string, std::less<>> kComparisonMarkers = {"vs", "versus", "or"};

const std::set<std::string, std::less<>> kClaimMarkers = {
    "is",    "are",   "was",   "were", "be",    "been",  "being", "should",
    "must",  "can",   "could", "would", "will", "shall", "may",   "might",
    "ought", "does",  "do",    "has",  "have",  "need",  "needs",
};

bool is_ascii_lower_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<TokenSeq> tokenized_patterns(const NormalizationRules& rules) {
  std::vector<TokenSeq> out;
  out.reserve(rules.cliche_patterns.size());
  for (const auto& p : rules.cliche_patterns) {
    auto toks = tokenize(p);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

TokenSeq strip_patterns(TokenSeq tokens, const std::vector<TokenSeq>& patterns) {
  for (const auto& pat : patterns) {
    TokenSeq kept;
    kept.reserve(tokens.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
      if (i + pat.size() <= tokens.size() &&
          std::equal(pat.begin(), pat.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        i += pat.size();
      } else {
        kept.push_back(std::move(tokens[i]));
        ++i;
      }
    }
    tokens = std::move(kept);
  }
  return tokens;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq tokens;
  if (text.empty()) return tokens;
  const icu::UnicodeString u = to_unicode(text);
  auto& bi = word_iterator();
  bi.setText(u);
  int32_t start = bi.first();
  for (int32_t end = bi.next(); end != icu::BreakIterator::DONE; start = end, end = bi.next()) {
    if (bi.getRuleStatus() < UBRK_WORD_NONE_LIMIT) continue;
    icu::UnicodeString seg(u, start, end - start);
    seg.foldCase();
    std::string s;
    seg.toUTF8String(s);
    tokens.push_back(std::move(s));
  }
  return tokens;
}

std::string case_fold(std::string_view text) {
  icu::UnicodeString u = to_unicode(text);
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  auto push = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (e > b) out.push_back(text.substr(b, e - b));
  };
  std::size_t begin = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && is_space(text[i + 1])) {
      push(begin, i + 1);
      begin = i + 1;
    }
  }
  push(begin, text.size());
  return out;
}

std::string_view to_string(LabelType t) {
  switch (t) {
    case LabelType::concept_: return "concept";
    case LabelType::comparison: return "comparison";
    case LabelType::conclusion: return "conclusion";
    case LabelType::question: return "question";
    case LabelType::imperative: return "imperative";
  }
  return "concept";
}

NormalizationRules NormalizationRules::defaults() {
  NormalizationRules r;
  r.cliche_patterns = {
      "this house believes that", "this house believes", "this house should",
      "this house would",         "this house supports", "this house opposes",
      "this house regrets",       "this house",          "should we",
      "we should",                "it is time to",       "is it time to",
      "do you think",
  };
  r.stance_words = {"abolish", "adopt",   "allow",    "ban",      "forbid",
                    "legalise", "legalize", "mandate", "oppose",   "outlaw",
                    "prohibit", "restrict", "support"};
  r.singular_exceptions = {
      {"analyses", "analysis"},     {"children", "child"},   {"cookies", "cookie"},
      {"crises", "crisis"},         {"criteria", "criterion"}, {"feet", "foot"},
      {"geese", "goose"},           {"halves", "half"},      {"hypotheses", "hypothesis"},
      {"indices", "index"},         {"knives", "knife"},     {"leaves", "leaf"},
      {"lives", "life"},            {"men", "man"},          {"mice", "mouse"},
      {"movies", "movie"},          {"people", "person"},    {"phenomena", "phenomenon"},
      {"selves", "self"},           {"shelves", "shelf"},    {"shoes", "shoe"},
      {"teeth", "tooth"},           {"theses", "thesis"},    {"thieves", "thief"},
      {"wives", "wife"},            {"wolves", "wolf"},      {"women", "woman"},
  };
  return r;
}

NormalizationRules NormalizationRules::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("rules file: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("rules file: top level must be an object");
  NormalizationRules r;
  auto strings = [&](const char* key) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end()) return out;
    if (!it->is_array()) throw ConfigError(std::string("rules file: '") + key + "' must be an array");
    for (const auto& v : *it) {
      if (!v.is_string() || v.get<std::string>().empty()) {
        throw ConfigError(std::string("rules file: '") + key + "' entries must be non-empty strings");
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  r.cliche_patterns = strings("cliche_patterns");
  for (auto& w : strings("stance_words")) r.stance_words.insert(case_fold(w));
  if (auto it = j.find("singular_exceptions"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("rules file: 'singular_exceptions' must be an object");
    for (const auto& [k, v] : it->items()) {
      if (k.empty() || !v.is_string() || v.get<std::string>().empty()) {
        throw ConfigError("rules file: 'singular_exceptions' must map words to non-empty words");
      }
      r.singular_exceptions[case_fold(k)] = case_fold(v.get<std::string>());
    }
  }
  if (auto it = j.find("singularization"); it != j.end()) {
    if (!it->is_boolean()) throw ConfigError("rules file: 'singularization' must be a boolean");
    r.singularization = it->get<bool>();
  }
  return r;
}

std::string NormalizationRules::to_json() const {
  nlohmann::json j;
  j["cliche_patterns"] = cliche_patterns;
  j["stance_words"] = stance_words;
  j["singular_exceptions"] = singular_exceptions;
  j["singularization"] = singularization;
  return j.dump(2);
}

std::string singularize(std::string_view word, const NormalizationRules& rules) {
  const auto& ex = rules.singular_exceptions;
  if (auto it = ex.find(std::string(word)); it != ex.end()) return it->second;
  for (const auto& [plural, singular] : ex) {
    if (singular == word) return std::string(word);
  }
  if (!is_ascii_lower_word(word) || word.size() <= 3) return std::string(word);
  if (kInvariantWords.count(word)) return std::string(word);
  if (ends_with(word, "ss") || ends_with(word, "us") || ends_with(word, "is")) {
    return std::string(word);
  }

  std::string out;
  if (ends_with(word, "ies") && word.size() > 4) {
    out = std::string(word.substr(0, word.size() - 3)) + "y";
  } else if (ends_with(word, "sses") || ends_with(word, "ches") || ends_with(word, "shes") ||
             ends_with(word, "xes") || ends_with(word, "zzes")) {
    out = std::string(word.substr(0, word.size() - 2));
  } else if (word.back() == 's') {
    out = std::string(word.substr(0, word.size() - 1));
  } else {
    return std::string(word);
  }
  if (auto it = ex.find(out); it != ex.end()) return it->second;
  return out;
}

LabelType classify_label(std::string_view raw, const NormalizationRules& rules) {
  const auto last = raw.find_last_not_of(" \t\r\n");
  if (last != std::string_view::npos && raw[last] == '?') return LabelType::question;

  const TokenSeq tokens = strip_patterns(tokenize(raw), tokenized_patterns(rules));
  if (!tokens.empty() && rules.stance_words.count(tokens.front())) return LabelType::imperative;
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    if (kComparisonMarkers.count(tokens[i])) return LabelType::comparison;
  }
  for (const auto& t : tokens) {
    if (kClaimMarkers.count(t)) return LabelType::conclusion;
  }
  return LabelType::concept_;
}

NormalizedLabel normalize_label(std::string_view raw, const NormalizationRules& rules) {
  const auto patterns = tokenized_patterns(rules);
  TokenSeq tokens = tokenize(raw);
  while (true) {
    TokenSeq next = strip_patterns(tokens, patterns);
    std::erase_if(next, [&](const std::string& t) { return rules.stance_words.count(t) > 0; });
    if (rules.singularization) {
      for (auto& t : next) t = singularize(t, rules);
    }
    if (next == tokens) break;
    tokens = std::move(next);
  }
  if (tokens.empty()) {
    throw DegenerateLabelError("label normalizes to nothing: '" + std::string(raw) + "'");
  }
  std::string text;
  for (const auto& t : tokens) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  return {std::move(text), classify_label(raw, rules)};
}

}  // namespace argmap
