#include "argmap/categorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "argmap/error.hpp"
#include "argmap/hash.hpp"
#include "argmap/io.hpp"
#include "argmap/random.hpp"

namespace argmap {
namespace {

bool parse_double(std::string_view s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

void EmbeddingTable::add(std::string token, std::span<const double> vector) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be > 0");
  if (vector.size() != dimension_) {
    throw ConfigError("vector for '" + token + "' has " + std::to_string(vector.size()) +
                      " components, expected " + std::to_string(dimension_));
  }
  if (!rows_.emplace(token, tokens_.size()).second) {
    throw ConfigError("duplicate embedding for token '" + token + "'");
  }
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

const double* EmbeddingTable::find(std::string_view token) const {
  auto it = rows_.find(std::string(token));
  if (it == rows_.end()) return nullptr;
  return data_.data() + it->second * dimension_;
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::optional<std::size_t> header_count;
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0, dim = 0;
      if (fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], dim)) {
        if (dim == 0) throw ParseError(line_no, "header declares dimension 0");
        header_count = count;
        table = EmbeddingTable(dim);
        continue;
      }
    }
    if (fields.size() < 2) throw ParseError(line_no, "expected a token followed by components");
    if (table.dimension() == 0) table = EmbeddingTable(fields.size() - 1);
    if (fields.size() - 1 != table.dimension()) {
      throw ParseError(line_no, "expected " + std::to_string(table.dimension()) + " components, found " +
                                    std::to_string(fields.size() - 1));
    }
    values.resize(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!parse_double(fields[i], values[i - 1])) {
        throw ParseError(line_no, "component '" + std::string(fields[i]) + "' is not a finite number");
      }
    }
    try {
      table.add(std::string(fields[0]), values);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (table.empty()) throw ConfigError("embedding table is empty");
  if (header_count && *header_count != table.size()) {
    throw ParseError(1, "header declares " + std::to_string(*header_count) + " tokens, file has " +
                            std::to_string(table.size()));
  }
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open embeddings file " + path);
  return load_embeddings(in);
}

AboutnessPolicy AboutnessPolicy::threshold(double theta) {
  if (!std::isfinite(theta)) throw ConfigError("threshold must be finite");
  AboutnessPolicy p;
  p.kind = Kind::threshold;
  p.theta = theta;
  return p;
}

AboutnessPolicy AboutnessPolicy::top_k(std::size_t k) {
  if (k < 1) throw ConfigError("top-k policy needs k >= 1");
  AboutnessPolicy p;
  p.kind = Kind::top_k;
  p.k = k;
  return p;
}

AboutnessPolicy AboutnessPolicy::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("policy must look like threshold:0.05 or topk:12, got '" + std::string(spec) + "'");
  }
  const auto kind = spec.substr(0, colon), value = spec.substr(colon + 1);
  if (kind == "threshold") {
    double theta = 0;
    if (!parse_double(value, theta)) throw ConfigError("bad threshold '" + std::string(value) + "'");
    return threshold(theta);
  }
  if (kind == "topk") {
    std::size_t k = 0;
    if (!parse_size(value, k)) throw ConfigError("bad k '" + std::string(value) + "'");
    return top_k(k);
  }
  throw ConfigError("unknown policy kind '" + std::string(kind) + "'");
}

std::string AboutnessPolicy::parameter() const {
  return kind == Kind::threshold ? io::format_double(theta) : std::to_string(k);
}

std::string AboutnessPolicy::to_string() const {
  return std::string(kind_name()) + ":" + parameter();
}

std::vector<std::string> direct_match(const CorpusUnit& unit, std::span<const Topic* const> topics) {
  const std::string text = case_fold(unit.text);
  std::vector<std::string> out;
  for (const Topic* t : topics) {
    const std::string label = case_fold(t->label);
    if (!label.empty() && text.find(label) != std::string::npos) out.push_back(t->id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ScoredTopic> semantic_interpretation(const CorpusUnit& unit, const TopicIndex& idx) {
  const SparseVector u = tfidf_vector(idx, tokenize(unit.text));
  const double nu = norm(u);
  std::vector<ScoredTopic> ranked;
  if (nu == 0.0) return ranked;

  std::vector<double> dot(idx.n_topics(), 0.0);
  for (const auto& [term, weight] : u) {
    const double idf = tfidf_idf(idx.n_topics(), idx.df(term));
    for (const auto& p : idx.postings(term)) dot[p.topic] += weight * (p.tf * idf);
  }
  for (std::size_t i = 0; i < dot.size(); ++i) {
    const double nt = idx.topic_norm(i);
    if (dot[i] <= 0.0 || nt == 0.0) continue;
    ranked.push_back({idx.topic_ids()[i], std::clamp(dot[i] / (nu * nt), 0.0, 1.0)});
  }
  sort_ranked(ranked);
  return ranked;
}

DenseVector embed_text(const TokenSeq& tokens, const EmbeddingTable& table) {
  DenseVector sum(table.dimension(), 0.0);
  std::size_t covered = 0;
  for (const auto& t : tokens) {
    const double* v = table.find(t);
    if (!v) continue;
    ++covered;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  if (covered > 0) {
    for (auto& x : sum) x /= static_cast<double>(covered);
  }
  return sum;
}

TopicEmbedding topic_embedding(std::string topic_id, std::span<const std::string_view> documents,
                               const EmbeddingTable& table, std::size_t cap, std::uint64_t seed) {
  if (cap < 1) throw ConfigError("sentence cap must be >= 1");
  std::vector<std::string_view> sentences;
  for (auto doc : documents) {
    auto s = split_sentences(doc);
    sentences.insert(sentences.end(), s.begin(), s.end());
  }
  std::vector<std::size_t> chosen;
  if (sentences.size() > cap) {
    Rng rng(seed);
    chosen = sample_indices(sentences.size(), cap, rng);
  } else {
    chosen.resize(sentences.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
  }
  TokenSeq tokens;
  for (auto i : chosen) {
    auto t = tokenize(sentences[i]);
    tokens.insert(tokens.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return {std::move(topic_id), embed_text(tokens, table), chosen.size()};
}

std::vector<TopicEmbedding> embed_topics(const Ontology& ontology, int level,
                                         const EmbeddingTable& table, std::uint64_t seed,
                                         std::size_t cap) {
  if (!ontology.propagated()) {
    throw StateError("topic embeddings need a propagated ontology ('" + ontology.name() + "')");
  }
  const auto topics = ontology.topics_at(level);
  if (topics.empty()) {
    throw NotFoundError("ontology '" + ontology.name() + "' has no level " + std::to_string(level));
  }
  std::vector<TopicEmbedding> out;
  out.reserve(topics.size());
  for (const Topic* t : topics) {
    std::vector<std::string_view> docs;
    for (const TopicDocument* d : ontology.documents_of(t->id)) docs.push_back(d->text);
    out.push_back(topic_embedding(t->id, docs, table, cap, derive_seed(seed, t->id)));
  }
  return out;
}

double dense_cosine(std::span<const double> u, std::span<const double> v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  const std::size_t n = std::min(u.size(), v.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<ScoredTopic> text2vec_si(const CorpusUnit& unit,
                                     std::span<const TopicEmbedding> topic_embeddings,
                                     const EmbeddingTable& table) {
  for (const auto& te : topic_embeddings) {
    if (te.vector.size() != table.dimension()) {
      throw ConfigError("topic '" + te.topic_id + "' embedding has dimension " +
                        std::to_string(te.vector.size()) + ", table has " +
                        std::to_string(table.dimension()));
    }
  }
  const DenseVector u = embed_text(tokenize(unit.text), table);
  std::vector<ScoredTopic> ranked;
  ranked.reserve(topic_embeddings.size());
  for (const auto& te : topic_embeddings) ranked.push_back({te.topic_id, dense_cosine(u, te.vector)});
  sort_ranked(ranked);
  return ranked;
}

std::vector<std::string> apply_policy(std::span<const ScoredTopic> scored, const AboutnessPolicy& policy) {
  std::vector<std::string> out;
  if (policy.kind == AboutnessPolicy::Kind::threshold) {
    for (const auto& s : scored) {
      if (s.score > policy.theta) out.push_back(s.topic_id);
    }
  } else {
    const std::size_t n = std::min(policy.k, scored.size());
    for (std::size_t i = 0; i < n; ++i) out.push_back(scored[i].topic_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace argmap
