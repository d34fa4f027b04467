#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace argmap {

struct CorpusUnit {
  std::string corpus;
  std::string unit_id;
  std::string text;
  std::optional<std::string> raw_label;
  std::optional<std::string> granularity;
};

struct Corpus {
  std::string name;
  std::vector<CorpusUnit> units;  // file order
  bool labeled = true;            // every unit carries a raw label
};

// Reads the line-delimited unit format. Text and labels are stored byte for
// byte. Throws ParseError on malformed records, IntegrityError on duplicate
// (corpus, unit_id) or empty text. `default_name` names a corpus with no units.
Corpus load_corpus(std::istream& in, std::string default_name = {});
Corpus load_corpus_file(const std::string& path);

std::string serialize_corpus(const Corpus& c);

}  // namespace argmap
