#include "argmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <tuple>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "argmap/error.hpp"
#include "argmap/jsonl.hpp"

namespace argmap {

std::vector<Judgment> load_judgments(std::istream& in) {
  std::vector<Judgment> out;
  jsonl::for_each_record(in, [&](const jsonl::Json& rec, std::size_t line) {
    Judgment j;
    j.assessor = jsonl::require_string(rec, "assessor", line);
    j.unit_id = jsonl::require_string(rec, "unit_id", line);
    j.topic_id = jsonl::require_string(rec, "topic_id", line);
    j.about = jsonl::require_bool(rec, "about", line);
    j.timestamp = jsonl::require_int(rec, "timestamp", line);
    if (j.assessor.empty()) throw ParseError(line, "empty assessor");
    out.push_back(std::move(j));
  });
  return out;
}

std::vector<Judgment> load_judgments_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open judgments file " + path);
  return load_judgments(in);
}

std::string serialize_judgment(const Judgment& j) {
  return nlohmann::json{{"assessor", j.assessor},
                        {"unit_id", j.unit_id},
                        {"topic_id", j.topic_id},
                        {"about", j.about},
                        {"timestamp", j.timestamp}}
      .dump();
}

std::vector<Judgment> latest_judgments(std::span<const Judgment> records) {
  std::map<std::tuple<std::string, std::string, std::string>, const Judgment*> latest;
  for (const auto& j : records) {
    auto& slot = latest[{j.assessor, j.unit_id, j.topic_id}];
    if (!slot || j.timestamp >= slot->timestamp) slot = &j;
  }
  std::vector<Judgment> out;
  out.reserve(latest.size());
  for (const auto& [key, j] : latest) out.push_back(*j);
  return out;
}

Pool build_pool(const ApproachRankings& rankings, std::size_t depth) {
  Pool pool;
  const Rankings* reference = nullptr;
  for (const auto& [approach, per_unit] : rankings) {
    if (reference) {
      const bool same = per_unit.size() == reference->size() &&
                        std::equal(per_unit.begin(), per_unit.end(), reference->begin(),
                                   [](const auto& a, const auto& b) { return a.first == b.first; });
      if (!same) throw PreconditionError("approach '" + approach + "' ranks a different set of units");
    }
    reference = &per_unit;
    for (const auto& [unit, ranked] : per_unit) {
      auto& topics = pool[unit];
      for (std::size_t i = 0; i < std::min(depth, ranked.size()); ++i) topics.insert(ranked[i].topic_id);
    }
  }
  return pool;
}

std::size_t pool_pairs(const Pool& pool) {
  std::size_t n = 0;
  for (const auto& [unit, topics] : pool) n += topics.size();
  return n;
}

Gold gold_from_judgments(std::span<const Judgment> judgments, AggregationRule, const Pool* pool) {
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> votes;  // (about, total)
  for (const auto& j : latest_judgments(judgments)) {
    auto& v = votes[{j.unit_id, j.topic_id}];
    v.first += j.about ? 1 : 0;
    v.second += 1;
  }
  Gold gold;
  for (const auto& [pair, v] : votes) {
    if (2 * v.first > v.second) gold.about[pair.first].insert(pair.second);
  }
  if (pool) {
    for (const auto& [unit, topics] : *pool) {
      for (const auto& t : topics) {
        if (!votes.count({unit, t})) gold.unjudged.emplace_back(unit, t);
      }
    }
    if (!gold.unjudged.empty()) {
      std::string list;
      for (std::size_t i = 0; i < gold.unjudged.size() && i < 20; ++i) {
        list += " " + gold.unjudged[i].first + "/" + gold.unjudged[i].second;
      }
      spdlog::warn("{} pooled pairs have no judgment:{}{}", gold.unjudged.size(), list,
                   gold.unjudged.size() > 20 ? " ..." : "");
    }
  }
  return gold;
}

PRF prf(const TopicSets& predicted, const TopicSets& gold, const Pool& pool) {
  if (pool_pairs(pool) == 0) throw UndefinedMetricError("precision/recall undefined on an empty pool");
  auto contains = [](const TopicSets& sets, const std::string& unit, const std::string& topic) {
    auto it = sets.find(unit);
    return it != sets.end() && it->second.count(topic) > 0;
  };
  PRF r;
  for (const auto& [unit, topics] : pool) {
    for (const auto& t : topics) {
      const bool p = contains(predicted, unit, t), g = contains(gold, unit, t);
      if (p && g) ++r.tp;
      else if (p) ++r.fp;
      else if (g) ++r.fn;
    }
  }
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

double krippendorff_alpha_nominal(const std::vector<std::vector<int>>& items) {
  // Coincidence matrix over category codes.
  std::map<int, std::map<int, double>> o;
  bool pairable = false;
  for (const auto& values : items) {
    if (values.size() < 2) continue;
    pairable = true;
    std::map<int, std::size_t> counts;
    for (int v : values) ++counts[v];
    const double m = static_cast<double>(values.size());
    for (const auto& [c, nc] : counts) {
      for (const auto& [k, nk] : counts) {
        const double pairs = static_cast<double>(nc) * static_cast<double>(c == k ? nk - 1 : nk);
        o[c][k] += pairs / (m - 1.0);
      }
    }
  }
  if (!pairable) throw UndefinedMetricError("Krippendorff's alpha needs an item with at least two values");

  std::map<int, double> marginal;
  double n = 0.0, observed = 0.0;
  for (const auto& [c, row] : o) {
    for (const auto& [k, v] : row) {
      marginal[c] += v;
      n += v;
      if (c != k) observed += v;
    }
  }
  double expected = 0.0;
  for (const auto& [c, nc] : marginal) {
    for (const auto& [k, nk] : marginal) {
      if (c != k) expected += nc * nk;
    }
  }
  expected /= (n - 1.0);
  if (expected == 0.0) return 1.0;
  return 1.0 - observed / expected;
}

double krippendorff_alpha(std::span<const Judgment> judgments) {
  if (judgments.size() < 2) throw UndefinedMetricError("Krippendorff's alpha needs at least two judgments");
  std::map<std::pair<std::string, std::string>, std::vector<int>> items;
  for (const auto& j : latest_judgments(judgments)) items[{j.unit_id, j.topic_id}].push_back(j.about ? 1 : 0);
  std::vector<std::vector<int>> values;
  values.reserve(items.size());
  for (auto& [key, v] : items) values.push_back(std::move(v));
  return krippendorff_alpha_nominal(values);
}

TopicSets predict(const Rankings& scored, const AboutnessPolicy& policy) {
  TopicSets out;
  for (const auto& [unit, ranked] : scored) {
    auto ids = apply_policy(ranked, policy);
    out[unit] = std::set<std::string>(ids.begin(), ids.end());
  }
  return out;
}

SweepFamily SweepFamily::threshold_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw ConfigError("threshold grid step must lie in (0, 1]");
  const double inv = 1.0 / step;
  const auto n = std::llround(inv);
  if (std::abs(inv - static_cast<double>(n)) > 1e-9) throw ConfigError("1/step must be an integer");
  SweepFamily f;
  f.kind = AboutnessPolicy::Kind::threshold;
  for (long long i = 0; i <= n; ++i) f.thresholds.push_back(static_cast<double>(i) / static_cast<double>(n));
  return f;
}

SweepFamily SweepFamily::top_k_range(std::size_t max_k) {
  if (max_k < 1) throw ConfigError("top-k sweep needs K >= 1");
  SweepFamily f;
  f.kind = AboutnessPolicy::Kind::top_k;
  f.max_k = max_k;
  return f;
}

SweepResult sweep_policy(const Rankings& scored, const TopicSets& gold, const Pool& pool,
                         const SweepFamily& family) {
  std::vector<AboutnessPolicy> candidates;
  if (family.kind == AboutnessPolicy::Kind::threshold) {
    if (family.thresholds.empty()) throw ConfigError("empty threshold grid");
    std::vector<double> grid = family.thresholds;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    for (double theta : grid) candidates.push_back(AboutnessPolicy::threshold(theta));
  } else {
    for (std::size_t k = 1; k <= family.max_k; ++k) candidates.push_back(AboutnessPolicy::top_k(k));
  }
  std::optional<SweepResult> best;
  for (const auto& policy : candidates) {
    PRF r = prf(predict(scored, policy), gold, pool);
    if (!best || r.f1 > best->scores.f1) best = SweepResult{policy, r};
  }
  return *best;
}

}  // namespace argmap
