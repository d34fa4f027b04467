#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "argmap/categorize.hpp"
#include "argmap/index.hpp"

namespace argmap {

struct Judgment {
  std::string assessor;
  std::string unit_id;
  std::string topic_id;
  bool about = false;
  std::int64_t timestamp = 0;  // milliseconds since the Unix epoch
  bool operator==(const Judgment&) const = default;
};

// unit id -> topic ids
using TopicSets = std::map<std::string, std::set<std::string>>;
using Pool = TopicSets;
// unit id -> ranked topics
using Rankings = std::map<std::string, std::vector<ScoredTopic>>;
// approach name -> rankings
using ApproachRankings = std::map<std::string, Rankings>;

// Reads judgment records in file order ('#' lines are comments).
std::vector<Judgment> load_judgments(std::istream& in);
std::vector<Judgment> load_judgments_file(const std::string& path);
std::string serialize_judgment(const Judgment& j);

// One record per (assessor, unit, topic): the greatest timestamp wins, and
// among equal timestamps the later record. Sorted by key.
std::vector<Judgment> latest_judgments(std::span<const Judgment> records);

// Per unit, the union of every approach's top-`depth` topics. Throws
// PreconditionError if the approaches rank different unit sets.
Pool build_pool(const ApproachRankings& rankings, std::size_t depth = 5);

std::size_t pool_pairs(const Pool& pool);

enum class AggregationRule { majority };

struct Gold {
  TopicSets about;
  std::vector<std::pair<std::string, std::string>> unjudged;  // pooled (unit, topic) without judgments
};

// A topic is gold for a unit iff strictly more than half of its (latest)
// judgments say "about"; even splits are not about. With a pool, unjudged
// pooled pairs are listed and logged.
Gold gold_from_judgments(std::span<const Judgment> judgments, AggregationRule rule = AggregationRule::majority,
                         const Pool* pool = nullptr);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Micro-averaged over pooled (unit, topic) pairs; pairs outside the pool are
// ignored. An empty ratio is 0. Throws UndefinedMetricError on an empty pool.
PRF prf(const TopicSets& predicted, const TopicSets& gold, const Pool& pool);

// Nominal Krippendorff's alpha over items given as lists of category codes;
// items with fewer than two values are not pairable. Returns 1 when every
// pairable value is identical. Throws UndefinedMetricError when nothing is
// pairable.
double krippendorff_alpha_nominal(const std::vector<std::vector<int>>& items);

// Alpha over (unit, topic) items of binary aboutness judgments, using the
// latest record per (assessor, unit, topic).
double krippendorff_alpha(std::span<const Judgment> judgments);

TopicSets predict(const Rankings& scored, const AboutnessPolicy& policy);

struct SweepFamily {
  AboutnessPolicy::Kind kind = AboutnessPolicy::Kind::top_k;
  std::vector<double> thresholds;  // threshold kind
  std::size_t max_k = 1;           // top_k kind: 1..max_k

  // 0, step, 2*step, ..., 1; 1/step must be an integer.
  static SweepFamily threshold_grid(double step = 0.01);
  static SweepFamily top_k_range(std::size_t max_k);
};

struct SweepResult {
  AboutnessPolicy policy;
  PRF scores;
};

// The family member with the highest F1. Ties go to the member predicting
// fewer labels: smaller k, larger theta.
SweepResult sweep_policy(const Rankings& scored, const TopicSets& gold, const Pool& pool,
                         const SweepFamily& family);

}  // namespace argmap
