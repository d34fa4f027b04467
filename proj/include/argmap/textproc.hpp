#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace argmap {

using TokenSeq = std::vector<std::string>;

// Unicode word segmentation (UAX #29 via ICU), case-folded. Segments with no
// letter, digit, kana or ideograph are dropped, so punctuation and whitespace
// never become tokens. Safe to call concurrently.
TokenSeq tokenize(std::string_view text);

// Unicode full case folding of a UTF-8 string.
std::string case_fold(std::string_view text);

// Splits on '.', '!' or '?' followed by whitespace. The trailing remainder is a
// sentence of its own; blank sentences are skipped.
std::vector<std::string_view> split_sentences(std::string_view text);

enum class LabelType { concept_, comparison, conclusion, question, imperative };

std::string_view to_string(LabelType t);

struct NormalizationRules {
  std::vector<std::string> cliche_patterns;
  std::set<std::string> stance_words;
  std::map<std::string, std::string> singular_exceptions;
  bool singularization = true;

  // The rule set shipped in data/normalization_rules.json.
  static NormalizationRules defaults();
  // Parses the rules JSON object; throws ParseError/ConfigError.
  static NormalizationRules from_json(std::string_view text);
  std::string to_json() const;
};

struct NormalizedLabel {
  std::string text;
  LabelType type;
};

// English heuristic singular form of a single lowercase token.
std::string singularize(std::string_view word, const NormalizationRules& rules);

// Strips cliché patterns, drops stance words and singularizes what remains,
// repeating until nothing changes; the result is lowercase with single
// spaces. The type is classified from surface cues of the raw label.
// Throws DegenerateLabelError if nothing survives.
NormalizedLabel normalize_label(std::string_view raw, const NormalizationRules& rules);

LabelType classify_label(std::string_view raw, const NormalizationRules& rules);

}  // namespace argmap
