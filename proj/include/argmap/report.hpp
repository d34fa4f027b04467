#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "argmap/eval.hpp"

namespace argmap::report {

// A CSV document: one '#' comment line naming the producing run, a header
// row, then data rows.
class CsvDocument {
 public:
  CsvDocument(const std::string& comment, std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

// Rankings as written by `categorize`: keyed by (ontology, level), then by
// approach and unit.
struct LevelKey {
  std::string ontology;
  int level = 0;
  auto operator<=>(const LevelKey&) const = default;
};

using RankingTable = std::map<LevelKey, ApproachRankings>;

inline const std::vector<std::string> kRankingColumns = {"approach", "ontology", "level", "corpus",
                                                         "unit_id",  "rank",     "topic_id", "score"};

RankingTable read_rankings(std::istream& in);
RankingTable read_rankings_file(const std::filesystem::path& path);

inline const std::vector<std::string> kPoolColumns = {"ontology", "level", "unit_id", "topic_id"};

Pool read_pool(std::istream& in);
Pool read_pool_file(const std::filesystem::path& path);

}  // namespace argmap::report
