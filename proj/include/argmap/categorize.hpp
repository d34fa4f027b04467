#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "argmap/corpus.hpp"
#include "argmap/index.hpp"
#include "argmap/ontology.hpp"
#include "argmap/textproc.hpp"

namespace argmap {

using DenseVector = std::vector<double>;

// Static token vectors loaded from the common word-vector text layout.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  // Throws ConfigError on a zero dimension, a length mismatch or a duplicate token.
  void add(std::string token, std::span<const double> vector);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  // nullptr if the token is not covered.
  const double* find(std::string_view token) const;

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> rows_;
  std::vector<double> data_;
};

// One token per line followed by its components; an optional leading
// "count dimension" header line is validated when present.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::string& path);

inline constexpr std::size_t kSentenceCap = 10'000;

struct TopicEmbedding {
  std::string topic_id;
  DenseVector vector;
  std::size_t sampled_sentences = 0;
};

struct AboutnessPolicy {
  enum class Kind { threshold, top_k };
  Kind kind = Kind::top_k;
  double theta = 0.0;  // threshold kind
  std::size_t k = 1;   // top_k kind

  static AboutnessPolicy threshold(double theta);
  static AboutnessPolicy top_k(std::size_t k);
  // "threshold:0.05" or "topk:12"; throws ConfigError.
  static AboutnessPolicy parse(std::string_view spec);

  std::string_view kind_name() const { return kind == Kind::threshold ? "threshold" : "topk"; }
  std::string parameter() const;
  std::string to_string() const;
  bool operator==(const AboutnessPolicy&) const = default;
};

// Topics whose case-folded label occurs as a substring of the case-folded
// unit text. Sorted topic ids.
std::vector<std::string> direct_match(const CorpusUnit& unit, std::span<const Topic* const> topics);

// Cosine of TF-IDF vectors of the unit and each topic pseudo-document.
// Zero scores omitted; ranked.
std::vector<ScoredTopic> semantic_interpretation(const CorpusUnit& unit, const TopicIndex& idx);

// Mean of the vectors of covered tokens (each occurrence counts); zero
// vector when no token is covered.
DenseVector embed_text(const TokenSeq& tokens, const EmbeddingTable& table);

// Splits the documents into sentences; if there are more than `cap`, a
// seeded sample of `cap` sentences (without replacement) is embedded.
TopicEmbedding topic_embedding(std::string topic_id, std::span<const std::string_view> documents,
                               const EmbeddingTable& table, std::size_t cap, std::uint64_t seed);

// Embeds every topic of an index level. Each topic's sampling seed is
// derived from (seed, topic id), so results do not depend on topic order.
std::vector<TopicEmbedding> embed_topics(const Ontology& ontology, int level,
                                         const EmbeddingTable& table, std::uint64_t seed,
                                         std::size_t cap = kSentenceCap);

// Plain cosine of dense vectors, in [-1, 1]; 0 if either norm is 0.
double dense_cosine(std::span<const double> u, std::span<const double> v);

// Cosine of the averaged unit embedding with every topic vector, ranked.
// All topics are listed, including zero and negative scores. Throws
// ConfigError if any topic vector differs from the table dimension.
std::vector<ScoredTopic> text2vec_si(const CorpusUnit& unit,
                                     std::span<const TopicEmbedding> topic_embeddings,
                                     const EmbeddingTable& table);

// `scored` must be ranked. Threshold keeps scores strictly above theta;
// top-k keeps the first min(k, |scored|). Result is sorted by topic id.
std::vector<std::string> apply_policy(std::span<const ScoredTopic> scored, const AboutnessPolicy& policy);

}  // namespace argmap
