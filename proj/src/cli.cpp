#include "argmap/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "argmap/annotation.hpp"
#include "argmap/annotation_http.hpp"
#include "argmap/categorize.hpp"
#include "argmap/corpus.hpp"
#include "argmap/coverage.hpp"
#include "argmap/error.hpp"
#include "argmap/eval.hpp"
#include "argmap/index.hpp"
#include "argmap/io.hpp"
#include "argmap/log.hpp"
#include "argmap/ontology.hpp"
#include "argmap/report.hpp"
#include "argmap/textproc.hpp"

namespace argmap::cli {
namespace {

namespace fs = std::filesystem;
using report::CsvDocument;
using report::LevelKey;

struct Options {
  std::vector<std::string> ontologies;
  std::vector<std::string> corpora;
  int level = 1;
  std::string mapping;
  std::string embeddings;
  std::string judgments;
  std::string rankings;
  std::string pool;
  std::string rules;
  std::string policy;
  std::string index_cache;
  std::string ui;
  std::string host = "127.0.0.1";
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  std::uint64_t seed = 0;
  std::string out = ".";
  unsigned threads = 0;
  std::size_t shortlist_n = 50;
  std::size_t depth = 5;
  std::size_t max_k = 50;
  double grid_step = 0.01;
  int port = 8080;
};

// Files produced by a command, written only once everything succeeded.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string contents) { files_.emplace_back(name, std::move(contents)); }
  void commit(std::ostream& out) const {
    fs::create_directories(dir_);
    for (const auto& [name, contents] : files_) {
      io::write_atomic(dir_ / name, contents);
      out << "wrote " << (dir_ / name).string() << '\n';
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

void require_exists(const std::string& path) {
  if (!path.empty() && !fs::exists(path)) throw NotFoundError("file not found: " + path);
}

void require_all_exist(const Options& o) {
  for (const auto& p : o.ontologies) require_exists(p);
  for (const auto& p : o.corpora) require_exists(p);
  for (const auto& p : {o.mapping, o.embeddings, o.rankings, o.pool, o.rules}) require_exists(p);
}

std::string run_comment(const std::string& command, const Options& o) {
  return "argmap " + command + " seed=" + std::to_string(o.seed);
}

std::vector<Ontology> load_ontologies(const Options& o) {
  std::vector<Ontology> out;
  for (const auto& path : o.ontologies) {
    Ontology onto = propagate_documents(load_ontology_file(path));
    for (const auto& prev : out) {
      if (prev.name() == onto.name()) throw IntegrityError("two ontologies named '" + onto.name() + "'");
    }
    out.push_back(std::move(onto));
  }
  return out;
}

void require_level(const std::vector<Ontology>& ontologies, int level) {
  for (const auto& o : ontologies) {
    if (!o.has_level(level)) {
      throw NotFoundError("ontology '" + o.name() + "' has no level " + std::to_string(level));
    }
  }
}

std::vector<Corpus> load_corpora(const Options& o) {
  std::vector<Corpus> out;
  for (const auto& path : o.corpora) out.push_back(load_corpus_file(path));
  return out;
}

NormalizationRules load_rules(const Options& o) {
  if (o.rules.empty()) return NormalizationRules::defaults();
  return NormalizationRules::from_json(io::read_file(o.rules));
}

AboutnessPolicy parse_policy(const std::string& spec) {
  try {
    return AboutnessPolicy::parse(spec);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

TopicIndex build_or_load_index(const Ontology& onto, const Options& o) {
  const Bm25Params params{o.bm25_k1, o.bm25_b};
  if (o.index_cache.empty()) return TopicIndex::build(onto, o.level, params);
  const fs::path path = fs::path(o.index_cache) / ("index-" + onto.name() + "-L" + std::to_string(o.level) + ".bin");
  const auto fp = index_fingerprint(onto, o.level, params);
  if (std::ifstream in(path, std::ios::binary); in) {
    if (auto idx = TopicIndex::load(in, fp)) {
      spdlog::info("using cached index {}", path.string());
      return std::move(*idx);
    }
    spdlog::info("index cache {} is stale; rebuilding", path.string());
  }
  TopicIndex idx = TopicIndex::build(onto, o.level, params);
  fs::create_directories(path.parent_path());
  std::ostringstream buf(std::ios::binary);
  idx.save(buf);
  io::write_atomic(path, buf.str());
  return idx;
}

// Runs fn(i) for i in [0, n) on `threads` workers (0 = hardware concurrency).
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::string opt_double(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

// ---------------------------------------------------------------------------

int cmd_ingest_check(const Options& o, std::ostream& out) {
  require_all_exist(o);
  require_exists(o.judgments);
  const auto ontologies = load_ontologies(o);
  const auto corpora = load_corpora(o);

  CsvDocument stats(run_comment("ingest-check", o),
                    {"ontology", "level", "topics", "mean_authors", "mean_docs", "mean_tokens"});
  for (const auto& onto : ontologies) {
    out << "ontology " << onto.name() << ": " << onto.topics().size() << " topics\n";
    for (int level : onto.levels()) {
      const LevelStats s = level_stats(onto, level);
      stats.row({onto.name(), std::to_string(level), std::to_string(s.topic_count), opt_double(s.mean_authors),
                 io::format_double(s.mean_docs), io::format_double(s.mean_tokens)});
    }
  }
  for (const auto& c : corpora) {
    out << "corpus " << c.name << ": " << c.units.size() << " units, " << (c.labeled ? "labeled" : "unlabeled")
        << '\n';
  }
  if (!o.mapping.empty()) {
    std::vector<const Ontology*> ptrs;
    for (const auto& onto : ontologies) ptrs.push_back(&onto);
    std::ifstream in(o.mapping);
    const auto m = load_label_mapping(in, ptrs);
    out << "mapping: " << m.entries().size() << " labels\n";
  }
  if (!o.embeddings.empty()) {
    const auto table = load_embeddings_file(o.embeddings);
    out << "embeddings: " << table.size() << " tokens, dimension " << table.dimension() << '\n';
  }
  if (!o.judgments.empty()) {
    const auto j = load_judgments_file(o.judgments);
    out << "judgments: " << j.size() << " records, " << latest_judgments(j).size() << " latest\n";
  }
  Outputs files(o.out);
  files.add("level_stats.csv", stats.str());
  files.commit(out);
  return 0;
}

int cmd_index(const Options& o, std::ostream& out) {
  require_all_exist(o);
  const auto ontologies = load_ontologies(o);
  require_level(ontologies, o.level);
  Outputs files(o.out);
  CsvDocument stats(run_comment("index", o), {"ontology", "level", "topic_id", "label", "doc_len", "distinct_terms"});
  for (const auto& onto : ontologies) {
    const TopicIndex idx = TopicIndex::build(onto, o.level, {o.bm25_k1, o.bm25_b});
    std::vector<std::size_t> distinct(idx.n_topics(), 0);
    for (TermId t = 0; t < idx.vocabulary_size(); ++t) {
      for (const auto& p : idx.postings(t)) ++distinct[p.topic];
    }
    for (std::size_t i = 0; i < idx.n_topics(); ++i) {
      stats.row({onto.name(), std::to_string(o.level), idx.topic_ids()[i], idx.topic_labels()[i],
                 std::to_string(idx.doc_len()[i]), std::to_string(distinct[i])});
    }
    std::ostringstream buf(std::ios::binary);
    idx.save(buf);
    files.add("index-" + onto.name() + "-L" + std::to_string(o.level) + ".bin", buf.str());
    out << onto.name() << " L" << o.level << ": " << idx.n_topics() << " topics, " << idx.vocabulary_size()
        << " terms, avg length " << io::format_double(idx.avg_doc_len()) << '\n';
  }
  files.add("index_stats.csv", stats.str());
  files.commit(out);
  return 0;
}

int cmd_shortlist(const Options& o, std::ostream& out) {
  require_all_exist(o);
  const auto ontologies = load_ontologies(o);
  require_level(ontologies, o.level);
  const auto corpora = load_corpora(o);
  const auto rules = load_rules(o);
  std::optional<AboutnessPolicy> policy;
  if (!o.policy.empty()) policy = parse_policy(o.policy);

  const auto labels = corpus_labels(corpora, rules);
  CsvDocument doc(run_comment("shortlist", o), {"ontology", "level", "label", "rank", "topic_id", "score"});
  LabelMapping draft;
  for (const auto& onto : ontologies) {
    const TopicIndex idx = build_or_load_index(onto, o);
    const auto lists = shortlist_labels(labels, idx, o.shortlist_n);
    std::size_t short_lists = 0;
    for (const auto& [label, ranked] : lists) {
      if (ranked.size() < o.shortlist_n) ++short_lists;
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        doc.row({onto.name(), std::to_string(o.level), label, std::to_string(r + 1), ranked[r].topic_id,
                 io::format_double(ranked[r].score)});
      }
    }
    out << onto.name() << " L" << o.level << ": " << lists.size() << " labels, " << short_lists
        << " with fewer than " << o.shortlist_n << " candidates\n";
    if (policy) {
      const auto d = draft_mapping(lists, idx, *policy);
      for (const auto& [label, topics] : d.entries()) {
        for (const auto& t : topics) draft.add(label, t, Provenance::automatic);
      }
    }
  }
  Outputs files(o.out);
  files.add("shortlist.csv", doc.str());
  if (policy) files.add("mapping_draft.jsonl", serialize_label_mapping(draft));
  files.commit(out);
  return 0;
}

int cmd_categorize(const Options& o, std::ostream& out) {
  require_all_exist(o);
  const auto ontologies = load_ontologies(o);
  require_level(ontologies, o.level);
  const auto corpora = load_corpora(o);
  std::optional<AboutnessPolicy> policy;
  if (!o.policy.empty()) policy = parse_policy(o.policy);
  std::optional<EmbeddingTable> table;
  if (!o.embeddings.empty()) table = load_embeddings_file(o.embeddings);

  std::vector<const CorpusUnit*> units;
  std::set<std::string> unit_ids;
  for (const auto& c : corpora) {
    for (const auto& u : c.units) {
      if (!unit_ids.insert(u.unit_id).second) {
        throw IntegrityError("unit id '" + u.unit_id + "' occurs more than once across corpora");
      }
      units.push_back(&u);
    }
  }

  CsvDocument rankings(run_comment("categorize", o), report::kRankingColumns);
  CsvDocument pool_doc(run_comment("categorize", o), report::kPoolColumns);
  CsvDocument labels_doc(run_comment("categorize", o) + (policy ? " policy=" + policy->to_string() : ""),
                         {"approach", "ontology", "level", "unit_id", "topic_id"});
  const std::string level = std::to_string(o.level);

  for (const auto& onto : ontologies) {
    const TopicIndex idx = build_or_load_index(onto, o);
    const auto topics = onto.topics_at(o.level);
    std::vector<TopicEmbedding> topic_vectors;
    if (table) topic_vectors = embed_topics(onto, o.level, *table, o.seed);

    struct UnitResult {
      std::vector<std::string> direct;
      std::vector<ScoredTopic> si;
      std::vector<ScoredTopic> t2v;
    };
    std::vector<UnitResult> results(units.size());
    parallel_for(units.size(), o.threads, [&](std::size_t i) {
      results[i].direct = direct_match(*units[i], topics);
      results[i].si = semantic_interpretation(*units[i], idx);
      if (table) results[i].t2v = text2vec_si(*units[i], topic_vectors, *table);
    });

    auto emit = [&](const std::string& approach, const CorpusUnit& u, const std::vector<ScoredTopic>& ranked) {
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        rankings.row({approach, onto.name(), level, u.corpus, u.unit_id, std::to_string(r + 1), ranked[r].topic_id,
                      io::format_double(ranked[r].score)});
      }
    };
    for (std::size_t i = 0; i < units.size(); ++i) {
      const CorpusUnit& u = *units[i];
      std::vector<ScoredTopic> direct;
      for (const auto& id : results[i].direct) direct.push_back({id, 1.0});
      emit("direct", u, direct);
      emit("si", u, results[i].si);
      if (table) emit("t2v", u, results[i].t2v);

      std::set<std::string> pooled;
      for (const auto* ranked : {&results[i].si, &results[i].t2v}) {
        for (std::size_t r = 0; r < std::min(o.depth, ranked->size()); ++r) pooled.insert((*ranked)[r].topic_id);
      }
      for (const auto& t : pooled) pool_doc.row({onto.name(), level, u.unit_id, t});

      if (policy) {
        for (const auto& t : results[i].direct) labels_doc.row({"direct", onto.name(), level, u.unit_id, t});
        for (const auto& t : apply_policy(results[i].si, *policy)) {
          labels_doc.row({"si", onto.name(), level, u.unit_id, t});
        }
        if (table) {
          for (const auto& t : apply_policy(results[i].t2v, *policy)) {
            labels_doc.row({"t2v", onto.name(), level, u.unit_id, t});
          }
        }
      }
    }
    out << onto.name() << " L" << o.level << ": categorized " << units.size() << " units against "
        << idx.n_topics() << " topics\n";
  }

  Outputs files(o.out);
  files.add("rankings.csv", rankings.str());
  files.add("pool.csv", pool_doc.str());
  if (policy) files.add("labels.csv", labels_doc.str());
  files.commit(out);
  return 0;
}

// Gives every approach an entry (possibly empty) for every unit of its level.
void complete_units(report::RankingTable& table) {
  for (auto& [key, approaches] : table) {
    std::set<std::string> units;
    for (const auto& [name, per_unit] : approaches) {
      for (const auto& [unit, ranked] : per_unit) units.insert(unit);
    }
    for (auto& [name, per_unit] : approaches) {
      for (const auto& u : units) per_unit[u];
    }
  }
}

struct EvalInputs {
  report::RankingTable table;
  std::map<LevelKey, Pool> pools;
  Gold gold;
  std::vector<Judgment> judgments;
};

EvalInputs load_eval_inputs(const Options& o) {
  if (o.rankings.empty()) throw UsageError("--rankings is required");
  if (o.judgments.empty()) throw UsageError("--judgments is required");
  require_all_exist(o);
  require_exists(o.judgments);

  EvalInputs in;
  in.table = report::read_rankings_file(o.rankings);
  complete_units(in.table);
  in.judgments = load_judgments_file(o.judgments);

  Pool all;
  for (const auto& [key, approaches] : in.table) {
    ApproachRankings scored;
    for (const auto& [name, per_unit] : approaches) {
      if (name != "direct") scored.emplace(name, per_unit);
    }
    Pool pool = build_pool(scored, o.depth);
    for (const auto& [unit, topics] : pool) all[unit].insert(topics.begin(), topics.end());
    in.pools.emplace(key, std::move(pool));
  }
  in.gold = gold_from_judgments(in.judgments, AggregationRule::majority, &all);
  return in;
}

TopicSets direct_predictions(const Rankings& direct) {
  TopicSets out;
  for (const auto& [unit, ranked] : direct) {
    auto& s = out[unit];
    for (const auto& r : ranked) s.insert(r.topic_id);
  }
  return out;
}

const std::vector<std::string> kEvalColumns = {"approach", "ontology", "level", "policy", "parameter", "precision",
                                               "recall",   "f1",       "tp",    "fp",     "fn"};

std::vector<std::string> eval_row(const std::string& approach, const LevelKey& key, const std::string& policy,
                                  const std::string& parameter, const PRF& r) {
  return {approach,
          key.ontology,
          std::to_string(key.level),
          policy,
          parameter,
          io::format_double(r.precision),
          io::format_double(r.recall),
          io::format_double(r.f1),
          std::to_string(r.tp),
          std::to_string(r.fp),
          std::to_string(r.fn)};
}

std::string agreement_csv(const Options& o, const std::string& command, const std::vector<Judgment>& judgments) {
  CsvDocument doc(run_comment(command, o), {"records", "latest", "alpha"});
  const auto latest = latest_judgments(judgments);
  std::string alpha;
  try {
    alpha = io::format_double(krippendorff_alpha(judgments));
  } catch (const UndefinedMetricError& e) {
    spdlog::warn("{}", e.what());
  }
  doc.row({std::to_string(judgments.size()), std::to_string(latest.size()), alpha});
  return doc.str();
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.policy.empty()) throw UsageError("--policy is required");
  const AboutnessPolicy policy = parse_policy(o.policy);
  const EvalInputs in = load_eval_inputs(o);

  CsvDocument doc(run_comment("evaluate", o), kEvalColumns);
  for (const auto& [key, approaches] : in.table) {
    const Pool& pool = in.pools.at(key);
    if (pool_pairs(pool) == 0) {
      spdlog::warn("{} L{}: empty pool, skipped", key.ontology, key.level);
      continue;
    }
    for (const auto& [name, per_unit] : approaches) {
      const bool direct = name == "direct";
      const PRF r = prf(direct ? direct_predictions(per_unit) : predict(per_unit, policy), in.gold.about, pool);
      doc.row(eval_row(name, key, direct ? "match" : std::string(policy.kind_name()),
                       direct ? "" : policy.parameter(), r));
      out << name << ' ' << key.ontology << " L" << key.level << ": P=" << io::format_double(r.precision)
          << " R=" << io::format_double(r.recall) << " F1=" << io::format_double(r.f1) << '\n';
    }
  }
  Outputs files(o.out);
  files.add("evaluation.csv", doc.str());
  files.add("agreement.csv", agreement_csv(o, "evaluate", in.judgments));
  files.commit(out);
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const EvalInputs in = load_eval_inputs(o);
  const SweepFamily thresholds = SweepFamily::threshold_grid(o.grid_step);
  const SweepFamily top_k = SweepFamily::top_k_range(o.max_k);

  CsvDocument families(run_comment("sweep", o), kEvalColumns);
  CsvDocument best_doc(run_comment("sweep", o), kEvalColumns);
  for (const auto& [key, approaches] : in.table) {
    const Pool& pool = in.pools.at(key);
    if (pool_pairs(pool) == 0) {
      spdlog::warn("{} L{}: empty pool, skipped", key.ontology, key.level);
      continue;
    }
    for (const auto& [name, per_unit] : approaches) {
      if (name == "direct") {
        const PRF r = prf(direct_predictions(per_unit), in.gold.about, pool);
        best_doc.row(eval_row(name, key, "match", "", r));
        continue;
      }
      const SweepResult by_theta = sweep_policy(per_unit, in.gold.about, pool, thresholds);
      const SweepResult by_k = sweep_policy(per_unit, in.gold.about, pool, top_k);
      for (const auto* r : {&by_theta, &by_k}) {
        families.row(eval_row(name, key, std::string(r->policy.kind_name()), r->policy.parameter(), r->scores));
      }
      // Across families, equal F1 goes to the policy predicting fewer pairs.
      const auto predicted = [](const SweepResult& r) { return r.scores.tp + r.scores.fp; };
      const SweepResult& best =
          by_k.scores.f1 > by_theta.scores.f1 ||
                  (by_k.scores.f1 == by_theta.scores.f1 && predicted(by_k) < predicted(by_theta))
              ? by_k
              : by_theta;
      best_doc.row(eval_row(name, key, std::string(best.policy.kind_name()), best.policy.parameter(), best.scores));
      out << name << ' ' << key.ontology << " L" << key.level << ": best " << best.policy.to_string()
          << " F1=" << io::format_double(best.scores.f1) << '\n';
    }
  }
  Outputs files(o.out);
  files.add("sweep.csv", families.str());
  files.add("evaluation.csv", best_doc.str());
  files.add("agreement.csv", agreement_csv(o, "sweep", in.judgments));
  files.commit(out);
  return 0;
}

int cmd_coverage(const Options& o, std::ostream& out) {
  if (o.mapping.empty()) throw UsageError("--mapping is required");
  require_all_exist(o);
  const auto ontologies = load_ontologies(o);
  require_level(ontologies, o.level);
  const auto corpora = load_corpora(o);
  const auto rules = load_rules(o);
  std::vector<const Ontology*> ptrs;
  for (const auto& onto : ontologies) ptrs.push_back(&onto);
  std::ifstream mapping_in(o.mapping);
  const LabelMapping mapping = load_label_mapping(mapping_in, ptrs);
  const auto labels = corpus_labels(corpora, rules);

  CsvDocument curve_doc(run_comment("coverage", o), {"ontology", "level", "n", "proportion"});
  CsvDocument dist_doc(run_comment("coverage", o), {"ontology", "level", "topic_id", "label", "units"});
  CsvDocument stats_doc(run_comment("coverage", o), {"ontology", "level", "labels", "mapped_labels", "covered_topics",
                                                     "level_topics", "min", "mean", "max"});
  std::ostringstream summary;
  summary << run_comment("coverage", o) << '\n';
  const std::string level = std::to_string(o.level);
  for (const auto& onto : ontologies) {
    const auto level_topics = onto.topics_at(o.level).size();
    const MappingStats s = mapping_stats(mapping, onto, o.level, labels);
    stats_doc.row({onto.name(), level, std::to_string(labels.size()), std::to_string(s.mapped_label_count),
                   std::to_string(s.covered_topic_count), std::to_string(level_topics), opt_double(s.min_per_label),
                   opt_double(s.mean_per_label), opt_double(s.max_per_label)});

    const CoverageCurve curve = coverage_curve(mapping, onto, o.level);
    for (const auto& [n, p] : curve.points) {
      curve_doc.row({onto.name(), level, std::to_string(n), io::format_double(p)});
    }

    const UnitDistribution dist = unit_distribution(corpora, mapping, onto, o.level, rules);
    for (const auto& [id, n] : dist.counts) {
      dist_doc.row({onto.name(), level, id, onto.topic(id).label, std::to_string(n)});
    }
    dist_doc.row({onto.name(), level, "(unmapped)", "", std::to_string(dist.unmapped)});

    summary << onto.name() << " L" << o.level << ": " << s.mapped_label_count << " of " << labels.size()
            << " labels mapped; " << s.covered_topic_count << " of " << level_topics << " topics covered";
    if (s.mean_per_label) summary << "; " << io::format_double(*s.mean_per_label) << " topics per mapped label";
    summary << "; " << dist.unmapped << " units unmapped\n";
  }
  out << summary.str();
  Outputs files(o.out);
  files.add("curve.csv", curve_doc.str());
  files.add("distribution.csv", dist_doc.str());
  files.add("stats.csv", stats_doc.str());
  files.add("summary.txt", summary.str());
  files.commit(out);
  return 0;
}

int cmd_serve(const Options& o, std::ostream& out) {
  if (o.pool.empty()) throw UsageError("--pool is required");
  if (o.judgments.empty()) throw UsageError("--judgments is required");
  require_all_exist(o);
  std::vector<Ontology> ontologies;
  for (const auto& path : o.ontologies) ontologies.push_back(load_ontology_file(path));
  const auto corpora = load_corpora(o);
  AnnotationService service(make_annotation_data(report::read_pool_file(o.pool), corpora, ontologies), o.seed,
                            o.judgments);
  std::optional<fs::path> ui;
  if (!o.ui.empty()) ui = o.ui;
  AnnotationServer server(service, ui);
  const int port = server.bind(o.host, o.port);
  if (port < 0) throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
  out << "serving " << service.data().pool.size() << " pooled units on http://" << o.host << ':' << port << '\n'
      << std::flush;
  server.listen();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  log::init_from_env();
  Options o;
  CLI::App app{"Maps argument corpora onto topic ontologies.", "argmap"};
  app.require_subcommand(1);

  auto add_ontologies = [&](CLI::App* sc) {
    sc->add_option("--ontology", o.ontologies, "Ontology file (repeatable)")->required();
    sc->add_option("--level", o.level, "Ontology level");
  };
  auto add_corpora = [&](CLI::App* sc) {
    sc->add_option("--corpus,--corpora", o.corpora, "Corpus file (repeatable)");
  };
  auto add_bm25 = [&](CLI::App* sc) {
    sc->add_option("--bm25-k1", o.bm25_k1, "BM25 k1")->capture_default_str();
    sc->add_option("--bm25-b", o.bm25_b, "BM25 b")->capture_default_str();
    sc->add_option("--index-cache", o.index_cache, "Directory for cached indexes");
  };
  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sc->add_option("--out", o.out, "Output directory")->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest-check", "Validate inputs and report per-level ontology statistics");
  add_ontologies(ingest);
  add_corpora(ingest);
  ingest->add_option("--mapping", o.mapping, "Label mapping file");
  ingest->add_option("--embeddings", o.embeddings, "Token vector file");
  ingest->add_option("--judgments", o.judgments, "Judgments file");
  add_common(ingest);

  auto* index = app.add_subcommand("index", "Build topic indexes for one level");
  add_ontologies(index);
  add_bm25(index);
  add_common(index);

  auto* shortlist = app.add_subcommand("shortlist", "BM25 candidate topics per normalized corpus label");
  add_ontologies(shortlist);
  add_corpora(shortlist);
  add_bm25(shortlist);
  shortlist->add_option("--n", o.shortlist_n, "Candidates per label")->capture_default_str();
  shortlist->add_option("--rules", o.rules, "Normalization rules file");
  shortlist->add_option("--policy", o.policy, "Pre-fill a draft mapping: threshold:T or topk:K");
  add_common(shortlist);

  auto* categorize = app.add_subcommand("categorize", "Score corpus units against ontology topics");
  add_ontologies(categorize);
  add_corpora(categorize);
  add_bm25(categorize);
  categorize->add_option("--embeddings", o.embeddings, "Token vector file (enables t2v)");
  categorize->add_option("--policy", o.policy, "Aboutness policy: threshold:T or topk:K");
  categorize->add_option("--depth", o.depth, "Pool depth per approach")->capture_default_str();
  categorize->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  add_common(categorize);

  auto* coverage = app.add_subcommand("coverage", "Coverage curve, unit distribution and mapping statistics");
  add_ontologies(coverage);
  add_corpora(coverage);
  coverage->add_option("--mapping", o.mapping, "Label mapping file");
  coverage->add_option("--rules", o.rules, "Normalization rules file");
  add_common(coverage);

  auto add_eval = [&](CLI::App* sc) {
    sc->add_option("--rankings", o.rankings, "rankings.csv written by categorize");
    sc->add_option("--judgments", o.judgments, "Judgments file");
    sc->add_option("--depth", o.depth, "Pool depth per approach")->capture_default_str();
    add_common(sc);
  };
  auto* evaluate = app.add_subcommand("evaluate", "Precision/recall/F1 against pooled judgments");
  add_eval(evaluate);
  evaluate->add_option("--policy", o.policy, "Aboutness policy: threshold:T or topk:K");

  auto* sweep = app.add_subcommand("sweep", "Pick the F1-maximizing policy parameter per approach");
  add_eval(sweep);
  sweep->add_option("--max-k", o.max_k, "Largest k of the top-k sweep")->capture_default_str();
  sweep->add_option("--grid-step", o.grid_step, "Threshold grid step")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  serve->add_option("--ontology", o.ontologies, "Ontology file (repeatable)")->required();
  add_corpora(serve);
  serve->add_option("--pool", o.pool, "pool.csv written by categorize");
  serve->add_option("--judgments", o.judgments, "Judgments file (appended)");
  serve->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "Port")->capture_default_str();
  serve->add_option("--ui", o.ui, "Directory with the UI's static assets");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "argmap: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*ingest) return cmd_ingest_check(o, out);
    if (*index) return cmd_index(o, out);
    if (*shortlist) return cmd_shortlist(o, out);
    if (*categorize) return cmd_categorize(o, out);
    if (*coverage) return cmd_coverage(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*serve) return cmd_serve(o, out);
  } catch (const UsageError& e) {
    err << "argmap: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "argmap: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace argmap::cli
