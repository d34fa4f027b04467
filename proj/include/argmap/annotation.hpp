#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "argmap/corpus.hpp"
#include "argmap/eval.hpp"
#include "argmap/ontology.hpp"

namespace argmap {

// What the service needs to present pooled items.
struct AnnotationData {
  Pool pool;
  std::map<std::string, std::string> unit_texts;    // unit id -> text
  std::map<std::string, std::string> topic_labels;  // topic id -> label
};

// Resolves every pooled unit and topic against the corpora and ontologies.
// Throws IntegrityError on unknown or ambiguous ids.
AnnotationData make_annotation_data(Pool pool, std::span<const Corpus> corpora,
                                    std::span<const Ontology> ontologies);

struct PoolItem {
  std::string unit_id;
  std::string topic_id;
  bool operator==(const PoolItem&) const = default;
};

// Presentation order for one assessor: units shuffled, then the topics of
// each unit shuffled, all from one generator seeded by (seed, assessor).
struct AnnotationSession {
  std::string assessor;
  std::vector<std::string> unit_order;
  std::map<std::string, std::vector<std::string>> topic_order;
  std::vector<PoolItem> items;  // flattened in presentation order
};

AnnotationSession make_session(const Pool& pool, std::uint64_t seed, std::string_view assessor);

// Append-only judgment log with latest-wins reads. Writes are serialized;
// readers take immutable snapshots without blocking writers.
class JudgmentStore {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;  // assessor, unit, topic
  struct Snapshot {
    std::map<Key, Judgment> latest;
    std::size_t records = 0;
  };

  // Loads existing records from `file` (created on first write).
  explicit JudgmentStore(std::filesystem::path file);

  // Stamps the judgment with a strictly increasing timestamp, appends and
  // syncs it. Throws RetryableError if the write fails; nothing changes then.
  Judgment append(Judgment j);

  std::shared_ptr<const Snapshot> snapshot() const;

  // Header comment plus the latest record per key, sorted by key.
  std::string export_jsonl() const;

 private:
  std::filesystem::path file_;
  std::mutex write_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::int64_t last_timestamp_ = 0;
};

enum class EntryState { current, about, not_about, pending };
std::string_view to_string(EntryState s);

struct ItemView {
  bool complete = false;
  std::string assessor;
  std::string unit_id;
  std::string unit_text;
  std::string topic_id;
  std::string topic_label;
  struct Entry {
    std::string topic_id;
    std::string label;
    EntryState state;
  };
  std::vector<Entry> pool;  // in the assessor's topic order for the unit
  std::size_t judged = 0;
  std::size_t total = 0;

  nlohmann::json to_json() const;
};

struct Progress {
  std::string assessor;
  std::size_t judged = 0;
  std::size_t total = 0;
  nlohmann::json to_json() const;
};

class AnnotationService {
 public:
  AnnotationService(AnnotationData data, std::uint64_t seed, std::filesystem::path judgments_file);

  // First unjudged pair in the assessor's order, or a completion view.
  // Throws PreconditionError on an empty assessor id.
  ItemView next_item(const std::string& assessor);

  // Throws PreconditionError for pairs outside the pool and RetryableError on
  // write failure.
  Judgment submit_judgment(const std::string& assessor, const std::string& unit_id,
                           const std::string& topic_id, bool about);

  Progress progress(const std::string& assessor);
  std::string export_judgments() const { return store_.export_jsonl(); }

  const AnnotationData& data() const { return data_; }
  std::shared_ptr<const AnnotationSession> session(const std::string& assessor);

 private:
  AnnotationData data_;
  std::uint64_t seed_;
  JudgmentStore store_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<const AnnotationSession>> sessions_;
};

}  // namespace argmap
