#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "argmap/ontology.hpp"
#include "argmap/textproc.hpp"

namespace argmap {

using TermId = std::uint32_t;

struct SparseEntry {
  TermId term;
  double weight;
  bool operator==(const SparseEntry&) const = default;
};

// Sorted by term, no zero weights.
using SparseVector = std::vector<SparseEntry>;

struct ScoredTopic {
  std::string topic_id;
  double score = 0.0;
  bool operator==(const ScoredTopic&) const = default;
};

// Descending score, ascending topic id among equal scores.
void sort_ranked(std::vector<ScoredTopic>& ranked);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Queries longer than this are truncated (with a warning).
inline constexpr std::size_t kMaxQueryTokens = 10'000;

// Inverted index over one ontology level; each topic is a pseudo-document made
// of all documents attached to it. Immutable after build and safe to query
// from several threads.
class TopicIndex {
 public:
  struct Posting {
    std::uint32_t topic;  // ordinal into topic_ids()
    std::uint32_t tf;
  };

  // Throws StateError on an unpropagated ontology, NotFoundError on a
  // missing level, ConfigError on out-of-range parameters.
  static TopicIndex build(const Ontology& ontology, int level, Bm25Params params = {});

  const std::string& ontology_name() const { return ontology_; }
  int level() const { return level_; }
  const Bm25Params& params() const { return params_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  std::size_t n_topics() const { return topic_ids_.size(); }
  const std::vector<std::string>& topic_ids() const { return topic_ids_; }
  const std::vector<std::string>& topic_labels() const { return topic_labels_; }
  std::span<const std::uint64_t> doc_len() const { return doc_len_; }
  double avg_doc_len() const { return avg_doc_len_; }

  std::size_t vocabulary_size() const { return terms_.size(); }
  std::optional<TermId> term_id(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::size_t df(TermId id) const { return postings_[id].size(); }
  std::span<const Posting> postings(TermId id) const { return postings_[id]; }

  // Euclidean norm of a topic's TF-IDF vector.
  double topic_norm(std::size_t ordinal) const { return topic_norms_[ordinal]; }

  // Binary cache. load() returns nullopt when the stream is not a cache of
  // this format version or was built from different inputs/parameters.
  void save(std::ostream& out) const;
  static std::optional<TopicIndex> load(std::istream& in, std::uint64_t expected_fingerprint);

 private:
  TopicIndex() = default;
  void finish();

  std::string ontology_;
  int level_ = 0;
  Bm25Params params_;
  std::uint64_t fingerprint_ = 0;
  std::vector<std::string> topic_ids_;
  std::vector<std::string> topic_labels_;
  std::vector<std::uint64_t> doc_len_;
  double avg_doc_len_ = 0.0;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> term_ids_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<double> topic_norms_;
};

// Identifies the inputs of TopicIndex::build; changes whenever the level's
// topics, their documents or the parameters change.
std::uint64_t index_fingerprint(const Ontology& ontology, int level, Bm25Params params);

// ln(1 + (N - df + 0.5) / (df + 0.5))
double bm25_idf(std::size_t n_topics, std::size_t df);
// ln(N / df), 0 when df == 0
double tfidf_idf(std::size_t n_topics, std::size_t df);

// BM25 over all topics sharing a term with the query. Query-side term
// frequency multiplies each term's contribution. Zero scores are omitted.
std::vector<ScoredTopic> bm25_score(const TopicIndex& idx, const TokenSeq& query);

// tf(t) * ln(N/df(t)) over index terms only.
SparseVector tfidf_vector(const TopicIndex& idx, const TokenSeq& tokens);
SparseVector topic_tfidf_vector(const TopicIndex& idx, std::size_t ordinal);

double norm(const SparseVector& v);
// dot(u,v) / (|u||v|), 0 if either norm is 0.
double cosine(const SparseVector& u, const SparseVector& v);

}  // namespace argmap
