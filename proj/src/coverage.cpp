#include "argmap/coverage.hpp"

#include <algorithm>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "argmap/error.hpp"
#include "argmap/jsonl.hpp"

namespace argmap {

std::string_view to_string(Provenance p) {
  return p == Provenance::manual ? "manual" : "auto";
}

void LabelMapping::add(const std::string& label, MappedTopic topic, Provenance provenance) {
  provenance_[{label, topic}] = provenance;
  entries_[label].insert(std::move(topic));
}

Provenance LabelMapping::provenance(const std::string& label, const MappedTopic& topic) const {
  auto it = provenance_.find({label, topic});
  if (it == provenance_.end()) throw NotFoundError("no mapping of '" + label + "' to '" + topic.topic_id + "'");
  return it->second;
}

std::vector<std::string> LabelMapping::topics_for(const std::string& label, const std::string& ontology,
                                                  int level) const {
  std::vector<std::string> out;
  auto it = entries_.find(label);
  if (it == entries_.end()) return out;
  for (const auto& t : it->second) {
    if (t.ontology == ontology && t.level == level) out.push_back(t.topic_id);
  }
  return out;
}

LabelMapping load_label_mapping(std::istream& in, std::span<const Ontology* const> ontologies) {
  LabelMapping m;
  std::vector<std::string> offenders;
  std::size_t skipped = 0;
  jsonl::for_each_record(in, [&](const jsonl::Json& rec, std::size_t line) {
    const std::string label = jsonl::require_string(rec, "label", line);
    MappedTopic t;
    t.ontology = jsonl::require_string(rec, "ontology", line);
    t.level = static_cast<int>(jsonl::require_int(rec, "level", line));
    t.topic_id = jsonl::require_string(rec, "topic_id", line);
    Provenance prov = Provenance::manual;
    if (auto p = jsonl::optional_string(rec, "provenance", line)) {
      if (*p == "auto") {
        prov = Provenance::automatic;
      } else if (*p != "manual") {
        throw ParseError(line, "provenance must be 'manual' or 'auto'");
      }
    }
    auto onto = std::find_if(ontologies.begin(), ontologies.end(),
                             [&](const Ontology* o) { return o->name() == t.ontology; });
    if (onto == ontologies.end()) {
      ++skipped;
      return;
    }
    const Topic* topic = (*onto)->find(t.topic_id);
    if (!topic || topic->level != t.level) {
      offenders.push_back("line " + std::to_string(line) + ": " + t.ontology + "/L" +
                          std::to_string(t.level) + "/" + t.topic_id);
      return;
    }
    m.add(label, std::move(t), prov);
  });
  if (!offenders.empty()) {
    std::string msg = "mapping references unknown topics:";
    for (const auto& o : offenders) msg += "\n  " + o;
    throw IntegrityError(msg);
  }
  if (skipped > 0) spdlog::info("{} mapping entries name ontologies that are not loaded", skipped);
  return m;
}

std::string serialize_label_mapping(const LabelMapping& m) {
  std::string out;
  for (const auto& [label, topics] : m.entries()) {
    for (const auto& t : topics) {
      nlohmann::json j{{"label", label},
                       {"ontology", t.ontology},
                       {"level", t.level},
                       {"topic_id", t.topic_id},
                       {"provenance", std::string(to_string(m.provenance(label, t)))}};
      out += j.dump() + '\n';
    }
  }
  return out;
}

std::size_t UnitDistribution::total_mass() const {
  std::size_t total = unmapped;
  for (const auto& [id, n] : counts) total += n;
  return total;
}

std::string label_key(std::string_view raw, const NormalizationRules& rules) {
  try {
    return normalize_label(raw, rules).text;
  } catch (const DegenerateLabelError&) {
    std::string out;
    for (const auto& t : tokenize(raw)) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out.empty() ? case_fold(raw) : out;
  }
}

std::set<std::string> corpus_labels(std::span<const Corpus> corpora, const NormalizationRules& rules) {
  std::set<std::string> out;
  for (const auto& c : corpora) {
    for (const auto& u : c.units) {
      if (u.raw_label) out.insert(label_key(*u.raw_label, rules));
    }
  }
  return out;
}

std::map<std::string, std::vector<ScoredTopic>> shortlist_labels(const std::set<std::string>& labels,
                                                                 const TopicIndex& idx, std::size_t n) {
  std::map<std::string, std::vector<ScoredTopic>> out;
  for (const auto& label : labels) {
    auto ranked = bm25_score(idx, tokenize(label));
    if (ranked.size() > n) ranked.resize(n);
    out.emplace(label, std::move(ranked));
  }
  return out;
}

LabelMapping draft_mapping(const std::map<std::string, std::vector<ScoredTopic>>& shortlists,
                           const TopicIndex& idx, const AboutnessPolicy& policy) {
  LabelMapping m;
  for (const auto& [label, ranked] : shortlists) {
    for (auto& id : apply_policy(ranked, policy)) {
      m.add(label, MappedTopic{idx.ontology_name(), idx.level(), std::move(id)}, Provenance::automatic);
    }
  }
  return m;
}

MappingStats mapping_stats(const LabelMapping& m, const Ontology& ontology, int level,
                           const std::set<std::string>& all_labels) {
  MappingStats s;
  std::set<std::string> covered;
  std::size_t sum = 0, lo = 0, hi = 0;
  for (const auto& label : all_labels) {
    const auto topics = m.topics_for(label, ontology.name(), level);
    if (topics.empty()) continue;
    const std::size_t n = topics.size();
    lo = s.mapped_label_count == 0 ? n : std::min(lo, n);
    hi = std::max(hi, n);
    sum += n;
    ++s.mapped_label_count;
    covered.insert(topics.begin(), topics.end());
  }
  s.covered_topic_count = covered.size();
  if (s.mapped_label_count > 0) {
    s.min_per_label = static_cast<double>(lo);
    s.max_per_label = static_cast<double>(hi);
    s.mean_per_label = static_cast<double>(sum) / static_cast<double>(s.mapped_label_count);
  }
  return s;
}

CoverageCurve coverage_curve(const LabelMapping& m, const Ontology& ontology, int level) {
  const auto topics = ontology.topics_at(level);
  if (topics.empty()) {
    throw NotFoundError("ontology '" + ontology.name() + "' has no level " + std::to_string(level));
  }
  std::map<std::string, std::size_t> labels_per_topic;
  for (const auto& [label, mapped] : m.entries()) {
    for (const auto& t : mapped) {
      if (t.ontology == ontology.name() && t.level == level) ++labels_per_topic[t.topic_id];
    }
  }
  std::size_t max_count = 0;
  for (const auto& [id, n] : labels_per_topic) max_count = std::max(max_count, n);

  CoverageCurve curve{ontology.name(), level, {}};
  const double total = static_cast<double>(topics.size());
  for (std::size_t n = 1; n <= std::max<std::size_t>(max_count, 1); ++n) {
    std::size_t at_least = 0;
    for (const auto& [id, c] : labels_per_topic) at_least += c >= n ? 1 : 0;
    curve.points.emplace_back(n, static_cast<double>(at_least) / total);
  }
  return curve;
}

UnitDistribution unit_distribution(std::span<const Corpus> corpora, const LabelMapping& m,
                                   const Ontology& ontology, int level, const NormalizationRules& rules) {
  const auto topics = ontology.topics_at(level);
  if (topics.empty()) {
    throw NotFoundError("ontology '" + ontology.name() + "' has no level " + std::to_string(level));
  }
  for (const auto& c : corpora) {
    if (!c.labeled) throw PreconditionError("corpus '" + c.name + "' is not fully labeled");
  }
  std::map<std::string, std::size_t> counts;
  for (const Topic* t : topics) counts[t->id] = 0;

  UnitDistribution dist{ontology.name(), level, {}, 0};
  std::map<std::string, std::vector<std::string>> memo;
  for (const auto& c : corpora) {
    for (const auto& u : c.units) {
      const std::string& raw = *u.raw_label;
      auto it = memo.find(raw);
      if (it == memo.end()) {
        it = memo.emplace(raw, m.topics_for(label_key(raw, rules), ontology.name(), level)).first;
      }
      if (it->second.empty()) {
        ++dist.unmapped;
        continue;
      }
      for (const auto& id : it->second) ++counts[id];
    }
  }
  dist.counts.assign(counts.begin(), counts.end());
  std::stable_sort(dist.counts.begin(), dist.counts.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return dist;
}

}  // namespace argmap
