#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace argmap {

struct Topic {
  std::string id;
  std::string label;
  int level = 1;
  std::vector<std::string> parent_ids;  // sorted, unique
};

struct TopicDocument {
  std::string topic_id;
  std::string doc_id;
  std::string text;
  std::optional<std::string> author;
  std::size_t token_count = 0;
  // Set on copies created by propagation: the topic the document was
  // originally attached to.
  std::optional<std::string> propagated_from;
};

struct LevelStats {
  int level = 0;
  std::size_t topic_count = 0;
  std::optional<double> mean_authors;  // absent when no document has an author
  double mean_docs = 0.0;
  double mean_tokens = 0.0;
};

// A leveled DAG of topics with attached reference documents. Immutable once
// constructed; propagate_documents() returns a new value.
class Ontology {
 public:
  Ontology(std::string name, std::vector<Topic> topics, std::vector<TopicDocument> documents,
           bool propagated = false);

  const std::string& name() const { return name_; }
  const std::vector<Topic>& topics() const { return topics_; }
  const std::vector<TopicDocument>& documents() const { return documents_; }
  bool propagated() const { return propagated_; }

  const Topic* find(std::string_view id) const;
  const Topic& topic(std::string_view id) const;  // throws NotFoundError

  // Topics at `level` in ascending id order; empty if the level is absent.
  std::vector<const Topic*> topics_at(int level) const;
  std::vector<int> levels() const;
  bool has_level(int level) const;

  // All transitive ancestors of a topic, ascending by id.
  std::vector<std::string> ancestors(std::string_view id) const;

  // Documents attached to a topic, in attachment order.
  std::vector<const TopicDocument*> documents_of(std::string_view topic_id) const;

 private:
  std::string name_;
  std::vector<Topic> topics_;
  std::vector<TopicDocument> documents_;
  bool propagated_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> docs_by_topic_;
};

// Parses the line-delimited ontology format (topic and doc records in any
// order). An optional {"kind":"ontology","name":...} record overrides
// `default_name`. Throws ParseError or IntegrityError.
Ontology load_ontology(std::istream& in, std::string default_name);
Ontology load_ontology_file(const std::string& path);

// Attaches a copy of every document to each ancestor of its topic,
// deduplicated by (ancestor, doc_id). Throws StateError if already done.
Ontology propagate_documents(const Ontology& o);

// Table-style statistics for one level of a propagated ontology.
LevelStats level_stats(const Ontology& o, int level);

std::string serialize_ontology(const Ontology& o);

}  // namespace argmap
