#include "argmap/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <set>

#include "argmap/error.hpp"
#include "argmap/hash.hpp"
#include "argmap/random.hpp"

namespace argmap {
namespace {

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

bool in_pool(const Pool& pool, const std::string& unit, const std::string& topic) {
  auto it = pool.find(unit);
  return it != pool.end() && it->second.count(topic) > 0;
}

}  // namespace

AnnotationData make_annotation_data(Pool pool, std::span<const Corpus> corpora,
                                    std::span<const Ontology> ontologies) {
  AnnotationData data;
  std::map<std::string, std::string> texts;
  std::set<std::string> ambiguous_units;
  for (const auto& c : corpora) {
    for (const auto& u : c.units) {
      if (!texts.emplace(u.unit_id, u.text).second) ambiguous_units.insert(u.unit_id);
    }
  }
  std::map<std::string, std::string> labels;
  std::set<std::string> ambiguous_topics;
  for (const auto& o : ontologies) {
    for (const auto& t : o.topics()) {
      if (!labels.emplace(t.id, t.label).second) ambiguous_topics.insert(t.id);
    }
  }
  std::vector<std::string> problems;
  for (const auto& [unit, topics] : pool) {
    if (ambiguous_units.count(unit)) problems.push_back("unit id '" + unit + "' occurs in several corpora");
    else if (auto it = texts.find(unit); it == texts.end()) problems.push_back("unknown unit '" + unit + "'");
    else data.unit_texts[unit] = it->second;
    for (const auto& t : topics) {
      if (ambiguous_topics.count(t)) problems.push_back("topic id '" + t + "' occurs in several ontologies");
      else if (auto it = labels.find(t); it == labels.end()) problems.push_back("unknown topic '" + t + "'");
      else data.topic_labels[t] = it->second;
    }
  }
  if (!problems.empty()) {
    std::string msg = "pool does not resolve:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw IntegrityError(msg);
  }
  data.pool = std::move(pool);
  return data;
}

AnnotationSession make_session(const Pool& pool, std::uint64_t seed, std::string_view assessor) {
  AnnotationSession s;
  s.assessor = std::string(assessor);
  Rng rng(derive_seed(seed, assessor));
  for (const auto& [unit, topics] : pool) s.unit_order.push_back(unit);
  shuffle(s.unit_order, rng);
  for (const auto& [unit, topics] : pool) {
    std::vector<std::string> order(topics.begin(), topics.end());
    shuffle(order, rng);
    s.topic_order.emplace(unit, std::move(order));
  }
  for (const auto& unit : s.unit_order) {
    for (const auto& topic : s.topic_order.at(unit)) s.items.push_back({unit, topic});
  }
  return s;
}

JudgmentStore::JudgmentStore(std::filesystem::path file) : file_(std::move(file)) {
  auto snap = std::make_shared<Snapshot>();
  if (std::filesystem::exists(file_)) {
    const auto records = load_judgments_file(file_.string());
    snap->records = records.size();
    for (auto& j : latest_judgments(records)) {
      last_timestamp_ = std::max(last_timestamp_, j.timestamp);
      snap->latest.emplace(Key{j.assessor, j.unit_id, j.topic_id}, std::move(j));
    }
  }
  snapshot_ = std::move(snap);
}

Judgment JudgmentStore::append(Judgment j) {
  std::lock_guard lock(write_mutex_);
  j.timestamp = std::max(now_ms(), last_timestamp_ + 1);
  const std::string line = serialize_judgment(j) + '\n';

  const int fd = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw RetryableError("cannot open " + file_.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      ::close(fd);
      throw RetryableError("write to " + file_.string() + " failed: " + err);
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw RetryableError("fsync of " + file_.string() + " failed");

  last_timestamp_ = j.timestamp;
  auto next = std::make_shared<Snapshot>(*std::atomic_load(&snapshot_));
  next->latest.insert_or_assign(Key{j.assessor, j.unit_id, j.topic_id}, j);
  ++next->records;
  std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(next)));
  return j;
}

std::shared_ptr<const JudgmentStore::Snapshot> JudgmentStore::snapshot() const {
  return std::atomic_load(&snapshot_);
}

std::string JudgmentStore::export_jsonl() const {
  const auto snap = snapshot();
  std::string out = "# argmap judgments export: " + std::to_string(snap->latest.size()) + " records\n";
  for (const auto& [key, j] : snap->latest) out += serialize_judgment(j) + '\n';
  return out;
}

std::string_view to_string(EntryState s) {
  switch (s) {
    case EntryState::current: return "current";
    case EntryState::about: return "about";
    case EntryState::not_about: return "not-about";
    case EntryState::pending: return "pending";
  }
  return "pending";
}

nlohmann::json ItemView::to_json() const {
  nlohmann::json j;
  j["assessor"] = assessor;
  j["progress"] = {{"judged", judged}, {"total", total}};
  if (complete) {
    j["status"] = "complete";
    return j;
  }
  j["status"] = "item";
  j["unit"] = {{"unit_id", unit_id}, {"text", unit_text}};
  j["topic"] = {{"topic_id", topic_id}, {"label", topic_label}};
  auto& entries = j["pool"] = nlohmann::json::array();
  for (const auto& e : pool) {
    entries.push_back({{"topic_id", e.topic_id}, {"label", e.label}, {"state", std::string(to_string(e.state))}});
  }
  return j;
}

nlohmann::json Progress::to_json() const {
  return {{"assessor", assessor}, {"judged", judged}, {"total", total}, {"complete", judged == total}};
}

AnnotationService::AnnotationService(AnnotationData data, std::uint64_t seed,
                                     std::filesystem::path judgments_file)
    : data_(std::move(data)), seed_(seed), store_(std::move(judgments_file)) {}

std::shared_ptr<const AnnotationSession> AnnotationService::session(const std::string& assessor) {
  if (assessor.empty()) throw PreconditionError("assessor id must not be empty");
  std::lock_guard lock(sessions_mutex_);
  auto& slot = sessions_[assessor];
  if (!slot) slot = std::make_shared<const AnnotationSession>(make_session(data_.pool, seed_, assessor));
  return slot;
}

ItemView AnnotationService::next_item(const std::string& assessor) {
  const auto s = session(assessor);
  const auto snap = store_.snapshot();
  auto judged = [&](const std::string& unit, const std::string& topic) -> const Judgment* {
    auto it = snap->latest.find({assessor, unit, topic});
    return it == snap->latest.end() ? nullptr : &it->second;
  };

  ItemView view;
  view.assessor = assessor;
  view.total = s->items.size();
  const PoolItem* current = nullptr;
  for (const auto& item : s->items) {
    if (judged(item.unit_id, item.topic_id)) ++view.judged;
    else if (!current) current = &item;
  }
  if (!current) {
    view.complete = true;
    return view;
  }
  view.unit_id = current->unit_id;
  view.unit_text = data_.unit_texts.at(current->unit_id);
  view.topic_id = current->topic_id;
  view.topic_label = data_.topic_labels.at(current->topic_id);
  for (const auto& t : s->topic_order.at(current->unit_id)) {
    EntryState state = EntryState::pending;
    if (t == current->topic_id) state = EntryState::current;
    else if (const Judgment* j = judged(current->unit_id, t)) state = j->about ? EntryState::about : EntryState::not_about;
    view.pool.push_back({t, data_.topic_labels.at(t), state});
  }
  return view;
}

Judgment AnnotationService::submit_judgment(const std::string& assessor, const std::string& unit_id,
                                            const std::string& topic_id, bool about) {
  if (assessor.empty()) throw PreconditionError("assessor id must not be empty");
  if (!in_pool(data_.pool, unit_id, topic_id)) {
    throw PreconditionError("(" + unit_id + ", " + topic_id + ") is not in the pool");
  }
  return store_.append(Judgment{assessor, unit_id, topic_id, about, 0});
}

Progress AnnotationService::progress(const std::string& assessor) {
  const auto s = session(assessor);
  const auto snap = store_.snapshot();
  Progress p{assessor, 0, s->items.size()};
  for (const auto& item : s->items) {
    if (snap->latest.count({assessor, item.unit_id, item.topic_id})) ++p.judged;
  }
  return p;
}

}  // namespace argmap
