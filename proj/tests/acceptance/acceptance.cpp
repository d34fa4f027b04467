// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "argmap/categorize.hpp"
#include "argmap/cli.hpp"
#include "argmap/corpus.hpp"
#include "argmap/coverage.hpp"
#include "argmap/error.hpp"
#include "argmap/eval.hpp"
#include "argmap/index.hpp"
#include "argmap/io.hpp"
#include "argmap/textproc.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace argmap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kTol = 1e-9;

// Collects the first violated expectation of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failure_.empty()) failure_ = what;
  }
  void near(double got, double want, const std::string& what) {
    if (!(std::abs(got - want) <= kTol)) {
      std::ostringstream s;
      s << what << ": got " << got << ", want " << want;
      expect(false, s.str());
    }
  }
  const std::string& failure() const { return failure_; }

 private:
  std::string failure_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::map<std::string, double> as_map(const std::vector<ScoredTopic>& v) {
  std::map<std::string, double> m;
  for (const auto& s : v) m[s.topic_id] = s.score;
  return m;
}

oracle::Vec as_vec(const TopicIndex& idx, const SparseVector& v) {
  oracle::Vec m;
  for (const auto& e : v) m[idx.term(e.term)] = e.weight;
  return m;
}

std::vector<gen::IndexFixture> index_fixtures() {
  gen::Rng rng(2024);
  std::vector<gen::IndexFixture> out;
  for (int i = 0; i < 25; ++i) out.push_back(gen::index_fixture(rng, 10, 50));
  return out;
}

std::string bm25_oracle(Check& c) {
  const auto fixtures = index_fixtures();
  const auto t0 = Clock::now();
  for (const auto& f : fixtures) {
    const TopicIndex idx = TopicIndex::build(f.ontology, 1);
    for (const auto& q : f.queries) {
      const auto got = as_map(bm25_score(idx, q));
      const auto want = oracle::bm25(f.topic_words, q, 1.2, 0.75);
      c.expect(got.size() == want.size(), "scored topic sets differ");
      for (const auto& [id, s] : want) c.near(got.count(id) ? got.at(id) : -1.0, s, "bm25 " + id);
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
  return "25 fixtures, " + std::to_string(secs) + " s";
}

std::string tfidf_oracle(Check& c) {
  for (const auto& f : index_fixtures()) {
    const TopicIndex idx = TopicIndex::build(f.ontology, 1);
    for (const auto& q : f.queries) {
      const auto got = as_vec(idx, tfidf_vector(idx, q));
      const auto want = oracle::tfidf(f.topic_words, q);
      c.expect(got.size() == want.size(), "tf-idf supports differ");
      for (const auto& [t, w] : want) c.near(got.count(t) ? got.at(t) : -1.0, w, "tfidf " + t);
      for (std::size_t i = 0; i < idx.n_topics(); ++i) {
        const auto& words = f.topic_words.at(idx.topic_ids()[i]);
        c.near(cosine(tfidf_vector(idx, q), topic_tfidf_vector(idx, i)),
               oracle::cosine(want, oracle::tfidf(f.topic_words, words)), "cosine");
      }
    }
  }
  gen::Rng rng(99);
  auto random_vec = [&] {
    SparseVector v;
    for (TermId t = 0; t < 40; ++t) {
      if (gen::unit(rng) < 0.25) v.push_back({t, gen::unit(rng) * 5.0});
    }
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto u = random_vec(), v = random_vec();
    const double a = cosine(u, v);
    c.expect(a == cosine(v, u), "cosine not symmetric");
    c.expect(a >= 0.0 && a <= 1.0, "cosine out of [0,1]");
  }
  return "25 fixtures, 1000 vector pairs";
}

std::string policy_laws(Check& c) {
  gen::Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto list = gen::ranked_list(rng, gen::below(rng, 15));
    const double a = gen::unit(rng), b = gen::unit(rng);
    const auto lo = apply_policy(list, AboutnessPolicy::threshold(std::min(a, b)));
    const auto hi = apply_policy(list, AboutnessPolicy::threshold(std::max(a, b)));
    c.expect(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()), "threshold monotonicity");

    const std::size_t k1 = 1 + gen::below(rng, 15), k2 = k1 + gen::below(rng, 6);
    const auto small = apply_policy(list, AboutnessPolicy::top_k(k1));
    const auto big = apply_policy(list, AboutnessPolicy::top_k(k2));
    c.expect(std::includes(big.begin(), big.end(), small.begin(), small.end()), "top-k monotonicity");
    c.expect(small.size() == std::min(k1, list.size()), "|top-k| != min(k, n)");

    auto scaled = list;
    const double factor = 0.01 + gen::unit(rng) * 100.0;
    for (auto& s : scaled) s.score *= factor;
    sort_ranked(scaled);
    c.expect(apply_policy(scaled, AboutnessPolicy::top_k(k1)) == small, "scaling changed top-k");
  }
  return "1000 score lists";
}

std::string propagation(Check& c) {
  gen::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Ontology o = gen::dag_ontology(rng, 20, 3);
    std::map<std::string, std::vector<std::string>> parents;
    std::set<std::pair<std::string, std::string>> docs;
    for (const auto& t : o.topics()) parents[t.id] = t.parent_ids;
    for (const auto& d : o.documents()) docs.insert({d.topic_id, d.doc_id});
    std::set<std::pair<std::string, std::string>> got;
    const Ontology propagated = propagate_documents(o);
    for (const auto& d : propagated.documents()) {
      c.expect(got.insert({d.topic_id, d.doc_id}).second, "duplicate attachment");
    }
    c.expect(got == oracle::propagated_attachments(parents, docs), "attachment set differs from closure");
  }
  // Diamond: one Level-3 document reaches the shared grandparent once.
  const Ontology diamond("d",
                         {{"g", "G", 1, {}}, {"p1", "P1", 2, {"g"}}, {"p2", "P2", 2, {"g"}}, {"c", "C", 3, {"p1", "p2"}}},
                         {{"c", "doc", "text", std::nullopt, 1, std::nullopt}});
  c.expect(propagate_documents(diamond).documents_of("g").size() == 1, "diamond copied twice");
  return "100 random DAGs + diamond";
}

std::string alpha(Check& c) {
  c.expect(krippendorff_alpha_nominal({{1, 1, 1}, {0, 0, 0}, {1, 1}}) == 1.0, "perfect agreement != 1");
  c.expect(krippendorff_alpha_nominal({{0, 0}, {0, 0, 0}}) == 1.0, "single-category agreement != 1");
  std::vector<Judgment> unanimous;
  for (const char* a : {"x", "y", "z"}) unanimous.push_back({a, "u", "t", true, 1});
  c.expect(krippendorff_alpha(unanimous) == 1.0, "unanimous judgments != 1");

  gen::Rng rng(17);
  int checked = 0;
  while (checked < 10) {
    const auto js = gen::judgments(rng, 6 + gen::below(rng, 20), 3);
    std::map<std::pair<std::string, std::string>, std::vector<int>> by_item;
    for (const auto& j : js) by_item[{j.unit_id, j.topic_id}].push_back(j.about);
    std::vector<std::vector<int>> items;
    for (auto& [k, v] : by_item) items.push_back(v);
    double got;
    try {
      got = krippendorff_alpha(js);
    } catch (const UndefinedMetricError&) {
      continue;
    }
    c.near(got, oracle::alpha_nominal(items), "alpha fixture " + std::to_string(checked));
    ++checked;
  }
  return "perfect agreement + 10 random fixtures";
}

std::string sweep(Check& c) {
  gen::Rng rng(23);
  auto f = gen::eval_fixture(rng, 12, 10);
  for (auto& [u, r] : f.rankings) f.gold[u] = {r.front().topic_id};
  const auto best = sweep_policy(f.rankings, f.gold, f.pool, SweepFamily::top_k_range(10));
  c.expect(best.policy == AboutnessPolicy::top_k(1), "top-1 gold swept to " + best.policy.to_string());
  c.expect(best.scores.f1 == 1.0, "top-1 gold F1 != 1");

  for (int i = 0; i < 20; ++i) {
    const auto g = gen::eval_fixture(rng, 1 + gen::below(rng, 10), 10);
    const auto family_k = SweepFamily::top_k_range(10);
    const auto family_t = SweepFamily::threshold_grid(0.01);
    const auto by_k = sweep_policy(g.rankings, g.gold, g.pool, family_k);
    const auto by_t = sweep_policy(g.rankings, g.gold, g.pool, family_t);
    for (std::size_t k = 1; k <= family_k.max_k; ++k) {
      const auto counts = oracle::pooled_counts(predict(g.rankings, AboutnessPolicy::top_k(k)), g.gold, g.pool);
      c.expect(oracle::f1(counts) <= by_k.scores.f1, "top-k candidate beats sweep");
    }
    for (double t : family_t.thresholds) {
      const auto counts = oracle::pooled_counts(predict(g.rankings, AboutnessPolicy::threshold(t)), g.gold, g.pool);
      c.expect(oracle::f1(counts) <= by_t.scores.f1, "threshold candidate beats sweep");
    }
  }
  return "top-1 gold + 20 random fixtures";
}

std::string coverage(Check& c) {
  gen::Rng rng(31);
  const auto rules = NormalizationRules::defaults();
  const std::vector<std::string> words = {"gun", "plastic bottle", "cannabis", "school uniform", "tax", "euro", "zoo"};
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + gen::below(rng, 20);
    std::vector<Topic> topics;
    for (std::size_t t = 0; t < n; ++t) topics.push_back({"t" + std::to_string(t), "T", 1, {}});
    const Ontology o("o", topics, {});
    LabelMapping m;
    for (const auto& w : words) {
      for (std::size_t k = gen::below(rng, 4); k > 0; --k) {
        m.add(w, {"o", 1, "t" + std::to_string(gen::below(rng, n))}, Provenance::manual);
      }
    }
    const auto curve = coverage_curve(m, o, 1);
    for (std::size_t p = 1; p < curve.points.size(); ++p) {
      c.expect(curve.points[p].second <= curve.points[p - 1].second, "curve increases");
    }
    const auto stats = mapping_stats(m, o, 1, std::set<std::string>(words.begin(), words.end()));
    c.near(curve.points[0].second * static_cast<double>(n), static_cast<double>(stats.covered_topic_count),
           "point(1) * |topics|");

    Corpus corpus{"c", {}, true};
    std::size_t expected = 0;
    for (std::size_t u = gen::below(rng, 40); u > 0; --u) {
      const auto& w = words[gen::below(rng, words.size())];
      corpus.units.push_back({"c", "u" + std::to_string(u), "text", w, std::nullopt});
      const auto mapped = m.topics_for(w, "o", 1).size();
      expected += mapped ? mapped : 1;
    }
    const std::vector<Corpus> corpora = {corpus};
    c.expect(unit_distribution(corpora, m, o, 1, rules).total_mass() == expected, "unit mass not conserved");
  }
  return "50 random mappings";
}

std::string end_to_end(Check& c) {
  const std::string b = ARGMAP_FIXTURES "/bundle/";
  const fs::path root = fs::temp_directory_path() / ("argmap_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> files = {"rankings.csv", "pool.csv", "labels.csv", "evaluation.csv", "agreement.csv"};
  std::vector<std::map<std::string, std::string>> runs;
  const auto t0 = Clock::now();
  for (const char* run : {"first", "second"}) {
    const std::string out = (root / run).string();
    std::ostringstream sink, err;
    int rc = cli::run({"argmap", "categorize", "--ontology", b + "wef.jsonl", "--ontology", b + "wp.jsonl",
                       "--ontology", b + "dp.jsonl", "--level", "2", "--corpus", b + "corpus.jsonl", "--embeddings",
                       b + "embeddings.txt", "--policy", "threshold:0.05", "--seed", "0", "--out", out},
                      sink, err);
    c.expect(rc == 0, "categorize failed: " + err.str());
    rc = cli::run({"argmap", "evaluate", "--rankings", out + "/rankings.csv", "--judgments", b + "judgments.jsonl",
                   "--policy", "threshold:0.05", "--seed", "0", "--out", out},
                  sink, err);
    c.expect(rc == 0, "evaluate failed: " + err.str());
    std::map<std::string, std::string> contents;
    for (const auto& f : files) {
      contents[f] = fs::exists(root / run / f) ? io::read_file(root / run / f) : std::string();
      c.expect(!contents[f].empty(), f + " missing");
    }
    runs.push_back(std::move(contents));
  }
  const double secs = seconds_since(t0);
  for (const auto& f : files) c.expect(runs[0][f] == runs[1][f], f + " differs between runs");
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  fs::remove_all(root);
  return std::to_string(files.size()) + " CSVs identical, " + std::to_string(secs) + " s";
}

std::string normalization(Check& c) {
  const auto rules = NormalizationRules::from_json(io::read_file(ARGMAP_SOURCE_DIR "/data/normalization_rules.json"));
  c.expect(normalize_label("This house should ban guns", rules).text == "gun", "ban guns");
  c.expect(normalize_label("plastic bottles", rules).text == "plastic bottle", "plastic bottles");
  std::vector<std::string> labels;
  for (const auto& u : load_corpus_file(ARGMAP_FIXTURES "/bundle/corpus.jsonl").units) labels.push_back(*u.raw_label);
  labels.insert(labels.end(), {"This house would abolish the monarchy", "Should we adopt the euro?",
                               "It is time to outlaw smoking in cars", "Wolves in national parks",
                               "Nuclear power vs wind farms", "We should support refugees", "Policies on migrants"});
  for (const auto& l : labels) {
    const auto once = normalize_label(l, rules).text;
    c.expect(normalize_label(once, rules).text == once, "not idempotent: " + l);
  }
  return std::to_string(labels.size()) + " labels";
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);  // generated topics without tokens warn by design
  const std::vector<std::pair<std::string, std::function<std::string(Check&)>>> criteria = {
      {"bm25-oracle", bm25_oracle},     {"tfidf-cosine-oracle", tfidf_oracle}, {"policy-laws", policy_laws},
      {"propagation", propagation},     {"krippendorff-alpha", alpha},         {"sweep-optimality", sweep},
      {"coverage-analytics", coverage}, {"end-to-end-determinism", end_to_end}, {"label-normalization", normalization},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    std::string detail;
    try {
      detail = fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.failure().empty();
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << (ok ? detail : c.failure()) << ")\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
