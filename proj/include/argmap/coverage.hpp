#pragma once

#include <compare>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "argmap/categorize.hpp"
#include "argmap/corpus.hpp"
#include "argmap/index.hpp"
#include "argmap/ontology.hpp"
#include "argmap/textproc.hpp"

namespace argmap {

struct MappedTopic {
  std::string ontology;
  int level = 0;
  std::string topic_id;
  auto operator<=>(const MappedTopic&) const = default;
};

enum class Provenance { manual, automatic };

std::string_view to_string(Provenance p);

// Normalized topic label -> ontology topics it was mapped to.
class LabelMapping {
 public:
  void add(const std::string& label, MappedTopic topic, Provenance provenance);

  const std::map<std::string, std::set<MappedTopic>>& entries() const { return entries_; }
  Provenance provenance(const std::string& label, const MappedTopic& topic) const;
  bool empty() const { return entries_.empty(); }

  // Topic ids a label maps to within one ontology level, ascending.
  std::vector<std::string> topics_for(const std::string& label, const std::string& ontology, int level) const;

 private:
  std::map<std::string, std::set<MappedTopic>> entries_;
  std::map<std::pair<std::string, MappedTopic>, Provenance> provenance_;
};

// Parses mapping records and checks every topic against the given
// ontologies; all unresolvable entries are reported in one IntegrityError.
// Entries naming an ontology that is not given are skipped.
LabelMapping load_label_mapping(std::istream& in, std::span<const Ontology* const> ontologies);
std::string serialize_label_mapping(const LabelMapping& m);

struct MappingStats {
  std::size_t mapped_label_count = 0;
  std::size_t covered_topic_count = 0;
  std::optional<double> min_per_label;  // absent when no label is mapped
  std::optional<double> mean_per_label;
  std::optional<double> max_per_label;
};

struct CoverageCurve {
  std::string ontology;
  int level = 0;
  // n -> share of level topics mapped by at least n distinct labels.
  std::vector<std::pair<std::size_t, double>> points;
};

struct UnitDistribution {
  std::string ontology;
  int level = 0;
  // Every topic of the level, by descending count then ascending id.
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::size_t unmapped = 0;

  std::size_t total_mass() const;
};

// Normalized form of a raw corpus label; a label that normalizes to nothing
// falls back to its case-folded, whitespace-collapsed raw form.
std::string label_key(std::string_view raw, const NormalizationRules& rules);

// Distinct label keys of all labeled units.
std::set<std::string> corpus_labels(std::span<const Corpus> corpora, const NormalizationRules& rules);

// Top-n BM25 topics per label, using the label as the query.
std::map<std::string, std::vector<ScoredTopic>> shortlist_labels(const std::set<std::string>& labels,
                                                                 const TopicIndex& idx, std::size_t n = 50);

// Mapping pre-filled from shortlists by an aboutness policy; every entry has
// automatic provenance and is meant for human review.
LabelMapping draft_mapping(const std::map<std::string, std::vector<ScoredTopic>>& shortlists,
                           const TopicIndex& idx, const AboutnessPolicy& policy);

MappingStats mapping_stats(const LabelMapping& m, const Ontology& ontology, int level,
                           const std::set<std::string>& all_labels);

CoverageCurve coverage_curve(const LabelMapping& m, const Ontology& ontology, int level);

// Each unit adds one to every topic its normalized label maps to at this
// level, or to the unmapped bucket. Throws PreconditionError on an
// unlabeled corpus.
UnitDistribution unit_distribution(std::span<const Corpus> corpora, const LabelMapping& m,
                                   const Ontology& ontology, int level, const NormalizationRules& rules);

}  // namespace argmap
