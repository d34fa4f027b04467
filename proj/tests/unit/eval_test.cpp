#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "argmap/error.hpp"
#include "argmap/eval.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace argmap;

namespace {

std::vector<ScoredTopic> ranked(std::initializer_list<const char*> ids) {
  std::vector<ScoredTopic> out;
  double s = 1.0;
  for (const char* id : ids) out.push_back({id, s -= 0.1});
  return out;
}

Judgment j(std::string a, std::string u, std::string t, bool about, std::int64_t ts = 0) {
  return {std::move(a), std::move(u), std::move(t), about, ts};
}

// Nominal reliability data as rows of coders; -1 marks a missing value.
std::vector<std::vector<int>> items_from_coders(const std::vector<std::vector<int>>& coders) {
  std::vector<std::vector<int>> items(coders[0].size());
  for (const auto& row : coders) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] >= 0) items[i].push_back(row[i]);
    }
  }
  return items;
}

}  // namespace

TEST(LoadJudgments, ParsesAndRoundTrips) {
  std::istringstream in(R"(# export
{"assessor":"a","unit_id":"u1","topic_id":"t1","about":true,"timestamp":5}
{"assessor":"b","unit_id":"u1","topic_id":"t1","about":false,"timestamp":6}
)");
  const auto js = load_judgments(in);
  ASSERT_EQ(js.size(), 2u);
  EXPECT_EQ(js[0], j("a", "u1", "t1", true, 5));
  std::istringstream again(serialize_judgment(js[1]));
  EXPECT_EQ(load_judgments(again)[0], js[1]);

  std::istringstream bad(R"({"assessor":"a","unit_id":"u1","topic_id":"t1","about":"yes","timestamp":5})");
  EXPECT_THROW(load_judgments(bad), ParseError);
}

TEST(LatestJudgments, GreatestTimestampThenLaterRecord) {
  const std::vector<Judgment> js = {j("a", "u", "t", true, 10), j("a", "u", "t", false, 5),
                                    j("b", "u", "t", true, 7), j("b", "u", "t", false, 7)};
  const auto latest = latest_judgments(js);
  ASSERT_EQ(latest.size(), 2u);
  EXPECT_TRUE(latest[0].about);
  EXPECT_FALSE(latest[1].about);
}

TEST(BuildPool, UnionOfTopDepth) {
  ApproachRankings one = {{"si", {{"u", ranked({"a", "b", "c", "d", "e", "f", "g"})}}}};
  EXPECT_EQ(build_pool(one).at("u"), (std::set<std::string>{"a", "b", "c", "d", "e"}));

  ApproachRankings same = one;
  same["t2v"] = one["si"];
  EXPECT_EQ(build_pool(same).at("u").size(), 5u);

  ApproachRankings disjoint = one;
  disjoint["t2v"] = {{"u", ranked({"p", "q", "r", "s", "t", "a"})}};
  EXPECT_EQ(build_pool(disjoint).at("u").size(), 10u);
  EXPECT_EQ(pool_pairs(build_pool(disjoint)), 10u);

  ApproachRankings mismatched = one;
  mismatched["t2v"] = {{"other", ranked({"a"})}};
  EXPECT_THROW(build_pool(mismatched), PreconditionError);
}

TEST(Gold, StrictMajority) {
  const std::vector<Judgment> js = {
      j("a", "u", "t1", true), j("b", "u", "t1", true), j("c", "u", "t1", false),   // 2 of 3
      j("a", "u", "t2", true), j("b", "u", "t2", false),                            // tie
      j("a", "u", "t3", false), j("b", "u", "t3", false), j("c", "u", "t3", false)  // none
  };
  const Gold g = gold_from_judgments(js);
  EXPECT_EQ(g.about.at("u"), std::set<std::string>{"t1"});
}

TEST(Gold, ListsUnjudgedPooledPairs) {
  const Pool pool = {{"u", {"t1", "t2"}}};
  const Gold g = gold_from_judgments(std::vector<Judgment>{j("a", "u", "t1", true)}, AggregationRule::majority, &pool);
  ASSERT_EQ(g.unjudged.size(), 1u);
  EXPECT_EQ(g.unjudged[0], (std::pair<std::string, std::string>{"u", "t2"}));
}

TEST(Gold, InvariantUnderRecordOrder) {
  gen::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    auto js = gen::judgments(rng, 20, 3);
    const auto before = gold_from_judgments(js).about;
    std::shuffle(js.begin(), js.end(), rng);
    EXPECT_EQ(gold_from_judgments(js).about, before);
  }
}

TEST(Prf, Examples) {
  const Pool pool = {{"u1", {"a", "b", "c"}}, {"u2", {"a", "b", "c"}}};
  const TopicSets gold = {{"u1", {"a", "b"}}, {"u2", {"a", "b"}}};
  const PRF perfect = prf(gold, gold, pool);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);

  const PRF none = prf({}, gold, pool);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);

  const TopicSets predicted = {{"u1", {"a", "c", "outside"}}, {"u2", {"a"}}};
  const PRF r = prf(predicted, gold, pool);
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 2u);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 4.0 / 7.0);

  EXPECT_THROW(prf(gold, gold, Pool{}), UndefinedMetricError);
}

TEST(Prf, CountsMatchOracle) {
  gen::Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = gen::eval_fixture(rng, 1 + gen::below(rng, 6), 8);
    const auto predicted = predict(f.rankings, AboutnessPolicy::top_k(1 + gen::below(rng, 4)));
    const PRF r = prf(predicted, f.gold, f.pool);
    const auto c = oracle::pooled_counts(predicted, f.gold, f.pool);
    EXPECT_EQ(r.tp, c.tp);
    EXPECT_EQ(r.fp, c.fp);
    EXPECT_EQ(r.fn, c.fn);
    EXPECT_NEAR(r.f1, oracle::f1(c), 1e-12);
  }
}

TEST(Alpha, PublishedReferenceData) {
  // Four coders, twelve units, nominal; the reference value is 0.743.
  const std::vector<std::vector<int>> coders = {{1, 2, 3, 3, 2, 1, 4, 1, 2, -1, -1, -1},
                                                {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, -1, 3},
                                                {-1, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, -1},
                                                {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, -1}};
  EXPECT_NEAR(krippendorff_alpha_nominal(items_from_coders(coders)), 0.743421052631579, 1e-12);
}

TEST(Alpha, FrozenBinaryFixtures) {
  // 4 items x 3 assessors with two disagreements.
  const std::vector<std::vector<int>> two = {{1, 1, 0, 0}, {1, 0, 0, 0}, {1, 1, 0, 1}};
  EXPECT_NEAR(krippendorff_alpha_nominal(items_from_coders(two)), 7.0 / 18.0, 1e-12);
  // Two assessors always disagreeing on a balanced item set.
  const std::vector<std::vector<int>> opposed = {{1, 0, 1, 0}, {0, 1, 0, 1}};
  EXPECT_NEAR(krippendorff_alpha_nominal(items_from_coders(opposed)), -0.75, 1e-12);
}

TEST(Alpha, PerfectAgreementAndUndefined) {
  EXPECT_EQ(krippendorff_alpha_nominal({{1, 1, 1}, {0, 0}, {1, 1}}), 1.0);
  EXPECT_EQ(krippendorff_alpha_nominal({{1, 1}, {1, 1}}), 1.0);
  EXPECT_THROW(krippendorff_alpha_nominal({{1}, {0}}), UndefinedMetricError);
  EXPECT_THROW(krippendorff_alpha(std::vector<Judgment>{j("a", "u", "t", true)}), UndefinedMetricError);
}

TEST(Alpha, MatchesOracleAndIsInvariant) {
  gen::Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    auto js = gen::judgments(rng, 4 + gen::below(rng, 20), 3);
    std::map<std::pair<std::string, std::string>, std::vector<int>> by_item;
    for (const auto& x : js) by_item[{x.unit_id, x.topic_id}].push_back(x.about);
    std::vector<std::vector<int>> items;
    for (auto& [k, v] : by_item) items.push_back(v);
    double a;
    try {
      a = krippendorff_alpha(js);
    } catch (const UndefinedMetricError&) {
      continue;
    }
    EXPECT_NEAR(a, oracle::alpha_nominal(items), 1e-9);

    std::shuffle(js.begin(), js.end(), rng);
    for (auto& x : js) x.assessor = "renamed-" + x.assessor;
    EXPECT_NEAR(krippendorff_alpha(js), a, 1e-12);
  }
}

TEST(Sweep, TopOneGoldGivesKOne) {
  gen::Rng rng(34);
  auto f = gen::eval_fixture(rng, 10, 8);
  for (auto& [u, r] : f.rankings) f.gold[u] = {r.front().topic_id};
  const auto best = sweep_policy(f.rankings, f.gold, f.pool, SweepFamily::top_k_range(8));
  EXPECT_EQ(best.policy, AboutnessPolicy::top_k(1));
  EXPECT_EQ(best.scores.f1, 1.0);
}

TEST(Sweep, EmptyGoldPicksLargestTheta) {
  gen::Rng rng(35);
  auto f = gen::eval_fixture(rng, 5, 8);
  f.gold.clear();
  const auto best = sweep_policy(f.rankings, f.gold, f.pool, SweepFamily::threshold_grid(0.01));
  EXPECT_EQ(best.policy, AboutnessPolicy::threshold(1.0));
  EXPECT_EQ(best.scores.f1, 0.0);
}

TEST(Sweep, GridShape) {
  const auto g = SweepFamily::threshold_grid(0.01);
  ASSERT_EQ(g.thresholds.size(), 101u);
  EXPECT_EQ(g.thresholds[5], 0.05);
  EXPECT_EQ(g.thresholds.back(), 1.0);
  EXPECT_THROW(SweepFamily::threshold_grid(0.03), ConfigError);
  EXPECT_THROW(SweepFamily::threshold_grid(0.0), ConfigError);
}

TEST(Sweep, ExhaustivelyOptimal) {
  gen::Rng rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = gen::eval_fixture(rng, 1 + gen::below(rng, 8), 10);
    const auto by_k = sweep_policy(f.rankings, f.gold, f.pool, SweepFamily::top_k_range(10));
    const auto by_t = sweep_policy(f.rankings, f.gold, f.pool, SweepFamily::threshold_grid(0.05));
    for (std::size_t k = 1; k <= 10; ++k) {
      const double f1 = oracle::f1(oracle::pooled_counts(predict(f.rankings, AboutnessPolicy::top_k(k)), f.gold, f.pool));
      EXPECT_LE(f1, by_k.scores.f1 + 1e-12);
      if (f1 == by_k.scores.f1) EXPECT_LE(by_k.policy.k, k);
    }
    for (double t : SweepFamily::threshold_grid(0.05).thresholds) {
      const double f1 =
          oracle::f1(oracle::pooled_counts(predict(f.rankings, AboutnessPolicy::threshold(t)), f.gold, f.pool));
      EXPECT_LE(f1, by_t.scores.f1 + 1e-12);
      if (f1 == by_t.scores.f1) EXPECT_GE(by_t.policy.theta, t);
    }
  }
}
