#include "argmap/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>

#include <spdlog/spdlog.h>

#include "argmap/error.hpp"
#include "argmap/hash.hpp"

namespace argmap {
namespace {

constexpr char kMagic[8] = {'A', 'R', 'G', 'M', 'A', 'P', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

void check_params(const Bm25Params& p) {
  if (!(p.k1 > 0.0) || !std::isfinite(p.k1)) throw ConfigError("bm25 k1 must be > 0");
  if (!(p.b >= 0.0 && p.b <= 1.0)) throw ConfigError("bm25 b must lie in [0, 1]");
}

const TokenSeq& truncated(const TokenSeq& q, TokenSeq& storage) {
  if (q.size() <= kMaxQueryTokens) return q;
  spdlog::warn("query of {} tokens truncated to {}", q.size(), kMaxQueryTokens);
  storage.assign(q.begin(), q.begin() + kMaxQueryTokens);
  return storage;
}

// Distinct index terms of a token sequence with their counts, ordered by term id.
std::map<TermId, std::uint32_t> count_terms(const TopicIndex& idx, const TokenSeq& tokens) {
  std::map<TermId, std::uint32_t> counts;
  for (const auto& t : tokens) {
    if (auto id = idx.term_id(t)) ++counts[*id];
  }
  return counts;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

bool get_string(std::istream& in, std::string& s) {
  std::uint64_t n = 0;
  if (!get(in, n) || n > (1ULL << 32)) return false;
  s.resize(n);
  return static_cast<bool>(in.read(s.data(), static_cast<std::streamsize>(n)));
}

}  // namespace

void sort_ranked(std::vector<ScoredTopic>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const ScoredTopic& a, const ScoredTopic& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.topic_id < b.topic_id;
  });
}

std::uint64_t index_fingerprint(const Ontology& ontology, int level, Bm25Params params) {
  Fnv1a h;
  h.add(std::uint64_t{kFormatVersion}).sep().add(ontology.name()).sep();
  h.add(static_cast<std::uint64_t>(level));
  std::uint64_t k1_bits, b_bits;
  std::memcpy(&k1_bits, &params.k1, sizeof k1_bits);
  std::memcpy(&b_bits, &params.b, sizeof b_bits);
  h.add(k1_bits).add(b_bits);
  for (const Topic* t : ontology.topics_at(level)) {
    h.sep().add(t->id).sep().add(t->label);
    for (const TopicDocument* d : ontology.documents_of(t->id)) {
      h.sep().add(d->doc_id).sep().add(d->text);
    }
  }
  return h.digest();
}

TopicIndex TopicIndex::build(const Ontology& ontology, int level, Bm25Params params) {
  check_params(params);
  if (!ontology.propagated()) {
    throw StateError("index build needs a propagated ontology ('" + ontology.name() + "')");
  }
  const auto topics = ontology.topics_at(level);
  if (topics.empty()) {
    throw NotFoundError("ontology '" + ontology.name() + "' has no level " + std::to_string(level));
  }

  TopicIndex idx;
  idx.ontology_ = ontology.name();
  idx.level_ = level;
  idx.params_ = params;
  idx.fingerprint_ = index_fingerprint(ontology, level, params);

  for (std::uint32_t ord = 0; ord < topics.size(); ++ord) {
    const Topic* t = topics[ord];
    idx.topic_ids_.push_back(t->id);
    idx.topic_labels_.push_back(t->label);
    std::map<TermId, std::uint32_t> tf;
    std::uint64_t len = 0;
    for (const TopicDocument* d : ontology.documents_of(t->id)) {
      for (auto& tok : tokenize(d->text)) {
        ++len;
        auto [it, inserted] = idx.term_ids_.try_emplace(tok, static_cast<TermId>(idx.terms_.size()));
        if (inserted) {
          idx.terms_.push_back(tok);
          idx.postings_.emplace_back();
        }
        ++tf[it->second];
      }
    }
    if (len == 0) spdlog::warn("topic '{}' in '{}' has no tokens", t->id, ontology.name());
    idx.doc_len_.push_back(len);
    for (const auto& [term, count] : tf) idx.postings_[term].push_back({ord, count});
  }
  idx.finish();
  return idx;
}

void TopicIndex::finish() {
  double total = 0.0;
  for (auto l : doc_len_) total += static_cast<double>(l);
  avg_doc_len_ = doc_len_.empty() ? 0.0 : total / static_cast<double>(doc_len_.size());

  topic_norms_.assign(topic_ids_.size(), 0.0);
  for (TermId term = 0; term < postings_.size(); ++term) {
    const double idf = tfidf_idf(n_topics(), postings_[term].size());
    for (const auto& p : postings_[term]) {
      const double w = p.tf * idf;
      topic_norms_[p.topic] += w * w;
    }
  }
  for (auto& n : topic_norms_) n = std::sqrt(n);
}

std::optional<TermId> TopicIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

void TopicIndex::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put(out, kFormatVersion);
  put(out, fingerprint_);
  put_string(out, ontology_);
  put<std::int64_t>(out, level_);
  put(out, params_.k1);
  put(out, params_.b);
  put<std::uint64_t>(out, topic_ids_.size());
  for (std::size_t i = 0; i < topic_ids_.size(); ++i) {
    put_string(out, topic_ids_[i]);
    put_string(out, topic_labels_[i]);
    put(out, doc_len_[i]);
  }
  put<std::uint64_t>(out, terms_.size());
  for (TermId t = 0; t < terms_.size(); ++t) {
    put_string(out, terms_[t]);
    put<std::uint64_t>(out, postings_[t].size());
    for (const auto& p : postings_[t]) {
      put(out, p.topic);
      put(out, p.tf);
    }
  }
}

std::optional<TopicIndex> TopicIndex::load(std::istream& in, std::uint64_t expected_fingerprint) {
  char magic[sizeof kMagic];
  std::uint32_t version = 0;
  std::uint64_t fp = 0;
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return std::nullopt;
  if (!get(in, version) || version != kFormatVersion) return std::nullopt;
  if (!get(in, fp) || fp != expected_fingerprint) return std::nullopt;

  TopicIndex idx;
  idx.fingerprint_ = fp;
  std::int64_t level = 0;
  std::uint64_t n = 0;
  if (!get_string(in, idx.ontology_) || !get(in, level) || !get(in, idx.params_.k1) ||
      !get(in, idx.params_.b) || !get(in, n)) {
    return std::nullopt;
  }
  idx.level_ = static_cast<int>(level);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string id, label;
    std::uint64_t len = 0;
    if (!get_string(in, id) || !get_string(in, label) || !get(in, len)) return std::nullopt;
    idx.topic_ids_.push_back(std::move(id));
    idx.topic_labels_.push_back(std::move(label));
    idx.doc_len_.push_back(len);
  }
  std::uint64_t n_terms = 0;
  if (!get(in, n_terms)) return std::nullopt;
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    std::string term;
    std::uint64_t n_post = 0;
    if (!get_string(in, term) || !get(in, n_post) || n_post > n) return std::nullopt;
    std::vector<Posting> posts(n_post);
    for (auto& p : posts) {
      if (!get(in, p.topic) || !get(in, p.tf) || p.topic >= n) return std::nullopt;
    }
    idx.term_ids_.emplace(term, static_cast<TermId>(t));
    idx.terms_.push_back(std::move(term));
    idx.postings_.push_back(std::move(posts));
  }
  idx.finish();
  return idx;
}

double bm25_idf(std::size_t n_topics, std::size_t df) {
  const double n = static_cast<double>(n_topics), d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double tfidf_idf(std::size_t n_topics, std::size_t df) {
  if (df == 0) return 0.0;
  return std::log(static_cast<double>(n_topics) / static_cast<double>(df));
}

std::vector<ScoredTopic> bm25_score(const TopicIndex& idx, const TokenSeq& query) {
  TokenSeq storage;
  const auto counts = count_terms(idx, truncated(query, storage));
  std::vector<double> acc(idx.n_topics(), 0.0);
  const double k1 = idx.params().k1, b = idx.params().b, avgdl = idx.avg_doc_len();
  for (const auto& [term, qtf] : counts) {
    const double idf = bm25_idf(idx.n_topics(), idx.df(term));
    for (const auto& p : idx.postings(term)) {
      const double len_ratio = avgdl > 0.0 ? static_cast<double>(idx.doc_len()[p.topic]) / avgdl : 0.0;
      const double tf = p.tf;
      acc[p.topic] += qtf * idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len_ratio));
    }
  }
  std::vector<ScoredTopic> ranked;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i] > 0.0) ranked.push_back({idx.topic_ids()[i], acc[i]});
  }
  sort_ranked(ranked);
  return ranked;
}

SparseVector tfidf_vector(const TopicIndex& idx, const TokenSeq& tokens) {
  TokenSeq storage;
  SparseVector v;
  for (const auto& [term, tf] : count_terms(idx, truncated(tokens, storage))) {
    const double w = tf * tfidf_idf(idx.n_topics(), idx.df(term));
    if (w != 0.0) v.push_back({term, w});
  }
  return v;
}

SparseVector topic_tfidf_vector(const TopicIndex& idx, std::size_t ordinal) {
  SparseVector v;
  for (TermId t = 0; t < idx.vocabulary_size(); ++t) {
    const auto posts = idx.postings(t);
    auto it = std::lower_bound(posts.begin(), posts.end(), ordinal,
                               [](const TopicIndex::Posting& p, std::size_t o) { return p.topic < o; });
    if (it == posts.end() || it->topic != ordinal) continue;
    const double w = it->tf * tfidf_idf(idx.n_topics(), posts.size());
    if (w != 0.0) v.push_back({t, w});
  }
  return v;
}

double norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& e : v) s += e.weight * e.weight;
  return std::sqrt(s);
}

double cosine(const SparseVector& u, const SparseVector& v) {
  const double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double dot = 0.0;
  auto a = u.begin(), b = v.begin();
  while (a != u.end() && b != v.end()) {
    if (a->term < b->term) {
      ++a;
    } else if (b->term < a->term) {
      ++b;
    } else {
      dot += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return std::clamp(dot / (nu * nv), 0.0, 1.0);
}

}  // namespace argmap
