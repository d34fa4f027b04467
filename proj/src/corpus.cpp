#include "argmap/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "argmap/error.hpp"
#include "argmap/jsonl.hpp"

namespace argmap {

Corpus load_corpus(std::istream& in, std::string default_name) {
  Corpus c;
  std::set<std::pair<std::string, std::string>> keys;
  jsonl::for_each_record(in, [&](const jsonl::Json& rec, std::size_t line) {
    CorpusUnit u;
    u.corpus = jsonl::require_string(rec, "corpus", line);
    u.unit_id = jsonl::require_string(rec, "unit_id", line);
    u.text = jsonl::require_string(rec, "text", line);
    u.raw_label = jsonl::optional_string(rec, "raw_label", line);
    u.granularity = jsonl::optional_string(rec, "granularity", line);
    if (u.text.empty()) {
      throw IntegrityError("line " + std::to_string(line) + ": unit '" + u.unit_id + "' has empty text");
    }
    if (!keys.emplace(u.corpus, u.unit_id).second) {
      throw IntegrityError("line " + std::to_string(line) + ": duplicate unit '" + u.unit_id +
                           "' in corpus '" + u.corpus + "'");
    }
    if (!u.raw_label) c.labeled = false;
    c.units.push_back(std::move(u));
  });
  c.name = c.units.empty() ? std::move(default_name) : c.units.front().corpus;
  return c;
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open corpus file " + path);
  return load_corpus(in, std::filesystem::path(path).stem().string());
}

std::string serialize_corpus(const Corpus& c) {
  std::string out;
  for (const auto& u : c.units) {
    nlohmann::json j{{"corpus", u.corpus}, {"unit_id", u.unit_id}, {"text", u.text}};
    if (u.raw_label) j["raw_label"] = *u.raw_label;
    if (u.granularity) j["granularity"] = *u.granularity;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace argmap
