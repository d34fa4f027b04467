#include "argmap/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "argmap/error.hpp"
#include "argmap/jsonl.hpp"
#include "argmap/textproc.hpp"

namespace argmap {

Ontology::Ontology(std::string name, std::vector<Topic> topics,
                   std::vector<TopicDocument> documents, bool propagated)
    : name_(std::move(name)),
      topics_(std::move(topics)),
      documents_(std::move(documents)),
      propagated_(propagated) {
  if (topics_.empty()) throw IntegrityError("ontology has no topics");

  for (std::size_t i = 0; i < topics_.size(); ++i) {
    auto& t = topics_[i];
    if (t.id.empty()) throw IntegrityError("topic with empty id");
    if (t.level < 1) throw IntegrityError("topic '" + t.id + "' has level < 1");
    std::sort(t.parent_ids.begin(), t.parent_ids.end());
    t.parent_ids.erase(std::unique(t.parent_ids.begin(), t.parent_ids.end()), t.parent_ids.end());
    if (!by_id_.emplace(t.id, i).second) throw IntegrityError("duplicate topic id '" + t.id + "'");
  }

  for (const auto& t : topics_) {
    for (const auto& p : t.parent_ids) {
      if (!by_id_.count(p)) {
        throw IntegrityError("topic '" + t.id + "' references unknown parent '" + p + "'");
      }
    }
  }

  // Parent graph must be acyclic independently of the level rule.
  enum class Mark : unsigned char { none, active, done };
  std::vector<Mark> mark(topics_.size(), Mark::none);
  for (std::size_t root = 0; root < topics_.size(); ++root) {
    if (mark[root] != Mark::none) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::active;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& parents = topics_[node].parent_ids;
      if (next == parents.size()) {
        mark[node] = Mark::done;
        stack.pop_back();
        continue;
      }
      const std::size_t p = by_id_.at(parents[next++]);
      if (mark[p] == Mark::active) {
        throw IntegrityError("cycle through topic '" + topics_[p].id + "'");
      }
      if (mark[p] == Mark::none) {
        mark[p] = Mark::active;
        stack.emplace_back(p, 0);
      }
    }
  }

  for (const auto& t : topics_) {
    for (const auto& p : t.parent_ids) {
      auto it = by_id_.find(p);
      if (topics_[it->second].level >= t.level) {
        throw IntegrityError("topic '" + t.id + "' (level " + std::to_string(t.level) +
                             ") has parent '" + p + "' at level " +
                             std::to_string(topics_[it->second].level) +
                             "; parents must be on a strictly smaller level");
      }
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& d = documents_[i];
    if (!by_id_.count(d.topic_id)) {
      throw IntegrityError("document '" + d.doc_id + "' attached to unknown topic '" + d.topic_id + "'");
    }
    if (!seen.emplace(d.topic_id, d.doc_id).second) {
      throw IntegrityError("document '" + d.doc_id + "' attached twice to topic '" + d.topic_id + "'");
    }
    docs_by_topic_[d.topic_id].push_back(i);
  }
}

const Topic* Ontology::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &topics_[it->second];
}

const Topic& Ontology::topic(std::string_view id) const {
  if (const Topic* t = find(id)) return *t;
  throw NotFoundError("ontology '" + name_ + "' has no topic '" + std::string(id) + "'");
}

std::vector<const Topic*> Ontology::topics_at(int level) const {
  std::vector<const Topic*> out;
  for (const auto& t : topics_) {
    if (t.level == level) out.push_back(&t);
  }
  std::sort(out.begin(), out.end(), [](const Topic* a, const Topic* b) { return a->id < b->id; });
  return out;
}

std::vector<int> Ontology::levels() const {
  std::set<int> ls;
  for (const auto& t : topics_) ls.insert(t.level);
  return {ls.begin(), ls.end()};
}

bool Ontology::has_level(int level) const {
  return std::any_of(topics_.begin(), topics_.end(), [&](const Topic& t) { return t.level == level; });
}

std::vector<std::string> Ontology::ancestors(std::string_view id) const {
  std::set<std::string> out;
  std::vector<const Topic*> frontier{&topic(id)};
  while (!frontier.empty()) {
    const Topic* t = frontier.back();
    frontier.pop_back();
    for (const auto& p : t->parent_ids) {
      if (out.insert(p).second) frontier.push_back(&topics_[by_id_.at(p)]);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<const TopicDocument*> Ontology::documents_of(std::string_view topic_id) const {
  std::vector<const TopicDocument*> out;
  auto it = docs_by_topic_.find(std::string(topic_id));
  if (it == docs_by_topic_.end()) return out;
  out.reserve(it->second.size());
  for (auto i : it->second) out.push_back(&documents_[i]);
  return out;
}

Ontology load_ontology(std::istream& in, std::string default_name) {
  std::string name = std::move(default_name);
  std::vector<Topic> topics;
  std::vector<TopicDocument> docs;

  jsonl::for_each_record(in, [&](const jsonl::Json& rec, std::size_t line) {
    const std::string kind = jsonl::require_string(rec, "kind", line);
    if (kind == "topic") {
      Topic t;
      t.id = jsonl::require_string(rec, "id", line);
      t.label = jsonl::require_string(rec, "label", line);
      const long long level = jsonl::require_int(rec, "level", line);
      if (level < 1) throw ParseError(line, "level must be >= 1");
      t.level = static_cast<int>(level);
      auto parents = rec.find("parents");
      if (parents != rec.end() && !parents->is_null()) {
        if (!parents->is_array()) throw ParseError(line, "'parents' must be an array");
        for (const auto& p : *parents) {
          if (!p.is_string()) throw ParseError(line, "'parents' entries must be strings");
          t.parent_ids.push_back(p.get<std::string>());
        }
      }
      topics.push_back(std::move(t));
    } else if (kind == "doc") {
      TopicDocument d;
      d.topic_id = jsonl::require_string(rec, "topic_id", line);
      d.doc_id = jsonl::require_string(rec, "doc_id", line);
      d.text = jsonl::require_string(rec, "text", line);
      d.author = jsonl::optional_string(rec, "author", line);
      docs.push_back(std::move(d));
    } else if (kind == "ontology") {
      name = jsonl::require_string(rec, "name", line);
    } else {
      throw ParseError(line, "unknown record kind '" + kind + "'");
    }
  });

  for (auto& d : docs) d.token_count = tokenize(d.text).size();
  return Ontology(std::move(name), std::move(topics), std::move(docs), false);
}

Ontology load_ontology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open ontology file " + path);
  return load_ontology(in, std::filesystem::path(path).stem().string());
}

Ontology propagate_documents(const Ontology& o) {
  if (o.propagated()) throw StateError("ontology '" + o.name() + "' is already propagated");

  std::vector<TopicDocument> docs = o.documents();
  std::set<std::pair<std::string, std::string>> attached;
  for (const auto& d : docs) attached.emplace(d.topic_id, d.doc_id);

  const std::size_t original = docs.size();
  for (std::size_t i = 0; i < original; ++i) {
    for (const auto& anc : o.ancestors(docs[i].topic_id)) {
      if (!attached.emplace(anc, docs[i].doc_id).second) continue;
      TopicDocument copy = docs[i];
      copy.propagated_from = docs[i].topic_id;
      copy.topic_id = anc;
      docs.push_back(std::move(copy));
    }
  }
  return Ontology(o.name(), o.topics(), std::move(docs), true);
}

LevelStats level_stats(const Ontology& o, int level) {
  if (!o.propagated()) throw StateError("level statistics need a propagated ontology");
  const auto topics = o.topics_at(level);
  if (topics.empty()) {
    throw NotFoundError("ontology '" + o.name() + "' has no level " + std::to_string(level));
  }
  LevelStats s;
  s.level = level;
  s.topic_count = topics.size();
  std::size_t docs = 0, tokens = 0, authors = 0;
  bool any_author = false;
  for (const Topic* t : topics) {
    std::set<std::string> distinct;
    for (const TopicDocument* d : o.documents_of(t->id)) {
      ++docs;
      tokens += d->token_count;
      if (d->author) {
        any_author = true;
        distinct.insert(*d->author);
      }
    }
    authors += distinct.size();
  }
  const double n = static_cast<double>(s.topic_count);
  s.mean_docs = static_cast<double>(docs) / n;
  s.mean_tokens = static_cast<double>(tokens) / n;
  if (any_author) s.mean_authors = static_cast<double>(authors) / n;
  return s;
}

std::string serialize_ontology(const Ontology& o) {
  std::string out;
  out += nlohmann::json{{"kind", "ontology"}, {"name", o.name()}}.dump() + '\n';
  for (const auto& t : o.topics()) {
    out += nlohmann::json{{"kind", "topic"}, {"id", t.id}, {"label", t.label},
                          {"level", t.level}, {"parents", t.parent_ids}}.dump() + '\n';
  }
  for (const auto& d : o.documents()) {
    nlohmann::json j{{"kind", "doc"}, {"topic_id", d.topic_id}, {"doc_id", d.doc_id}, {"text", d.text}};
    if (d.author) j["author"] = *d.author;
    if (d.propagated_from) j["propagated_from"] = *d.propagated_from;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace argmap
