#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snipq/annotation.hpp"
#include "snipq/corpus.hpp"
#include "snipq/embedding.hpp"
#include "snipq/encoder_client.hpp"
#include "snipq/error.hpp"
#include "snipq/evaluation.hpp"
#include "snipq/random.hpp"
#include "snipq/ranking.hpp"
#include "snipq/scoring.hpp"
#include "snipq/tfidf.hpp"

namespace fs = std::filesystem;
using namespace snipq;

namespace {

constexpr const char* kEncoderEnv = "SNIPQ_ENCODER_URL";

// NAME=KIND[:ARG], e.g. bert=embedding:emb.jsonl or nli=nli:probs.csv.
struct MethodSpec {
  std::string name;
  std::string kind;
  std::string arg;
};

MethodSpec parse_method(const std::string& text) {
  MethodSpec m;
  const auto eq = text.find('=');
  const std::string rhs = eq == std::string::npos ? text : text.substr(eq + 1);
  const auto colon = rhs.find(':');
  m.kind = rhs.substr(0, colon);
  if (colon != std::string::npos) m.arg = rhs.substr(colon + 1);
  m.name = eq == std::string::npos ? m.kind : text.substr(0, eq);
  if (m.name.empty() || m.kind.empty()) throw DataError("bad method spec '" + text + "', expected NAME=KIND[:PATH]");
  return m;
}

std::string service_url(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kEncoderEnv); env && *env) return env;
  throw DataError(std::string("no encoder service URL: pass --service-url or set ") + kEncoderEnv);
}

std::unique_ptr<ScoreProvider> make_provider(const MethodSpec& m, const EntityDatabase& db) {
  auto need_arg = [&](const char* what) {
    if (m.arg.empty()) throw DataError("method '" + m.name + "' (" + m.kind + ") needs " + what);
  };
  if (m.kind == "tfidf") {
    auto index = m.arg.empty() ? TfIdfIndex::build(db.snippets()) : TfIdfIndex::load(fs::path(m.arg));
    return std::make_unique<TfIdfProvider>(std::make_shared<const TfIdfIndex>(std::move(index)));
  }
  if (m.kind == "embedding") {
    need_arg("an embedding file");
    return std::make_unique<EmbeddingProvider>(std::make_shared<const EmbeddingStore>(load_embeddings(m.arg)), m.name);
  }
  if (m.kind == "table" || m.kind == "nli") {
    need_arg("a score file");
    auto table = m.kind == "table" ? load_score_table(m.arg) : load_three_way_table(m.arg);
    return std::make_unique<ScoreTableProvider>(std::make_shared<const ScoreTable>(std::move(table)));
  }
  if (m.kind == "service") {
    return std::make_unique<EncoderServiceProvider>(EncoderClient(service_url(m.arg)));
  }
  throw DataError("unknown provider kind '" + m.kind + "' (expected tfidf, embedding, table, nli or service)");
}

EntityDatabase load_nonempty_corpus(const fs::path& path, int min_rating) {
  auto db = load_corpus(path, min_rating);
  if (db.empty()) throw DataError("empty corpus: " + path.string());
  return db;
}

const Query& find_query(const std::vector<Query>& queries, const std::string& id) {
  for (const auto& q : queries) {
    if (q.id == id) return q;
  }
  throw DataError("unknown query id '" + id + "'");
}

// Writes to `path`, or stdout when it is empty.
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_output(path);
  write(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

RankingParams ranking_params(std::size_t j, std::size_t n, bool strict) {
  RankingParams p{j, n, strict ? Averaging::kStrict : Averaging::kAvailable};
  p.validate();
  return p;
}

struct CorpusOpts {
  std::string corpus;
  int min_rating = kDefaultMinRating;
};

void add_corpus(CLI::App* cmd, CorpusOpts& o) {
  cmd->add_option("--corpus", o.corpus, "entity JSON-Lines file")->required();
  cmd->add_option("--min-rating", o.min_rating, "lowest review rating kept as a snippet")->capture_default_str();
}

// ---------------------------------------------------------------------------------------

struct IngestOpts {
  CorpusOpts corpus;
  std::string index_out;
};

void cmd_ingest(const IngestOpts& o) {
  const auto db = load_nonempty_corpus(o.corpus.corpus, o.corpus.min_rating);
  const auto index = TfIdfIndex::build(db.snippets());
  std::cout << "entities: " << db.size() << '\n'
            << "snippets: " << db.snippets().size() << '\n'
            << "vocabulary: " << index.vocabulary_size() << '\n';
  if (!o.index_out.empty()) index.save(fs::path(o.index_out));
}

struct RankOpts {
  CorpusOpts corpus;
  std::string queries;
  std::string query_id;
  bool interactive = false;
  std::string provider = "tfidf";
  std::string embeddings;
  std::string scores;
  std::string index;
  std::string url;
  std::size_t j = 5;
  std::size_t n = 5;
  bool hybrid = false;
  bool strict = false;
  std::string out;
};

MethodSpec rank_method(const RankOpts& o) {
  MethodSpec m{o.provider, o.provider, {}};
  if (o.provider == "tfidf") m.arg = o.index;
  else if (o.provider == "embedding") m.arg = o.embeddings;
  else if (o.provider == "table" || o.provider == "nli") m.arg = o.scores;
  else if (o.provider == "service") m.arg = o.url;
  return m;
}

std::vector<RankedEntity> rank_one(const ScoreProvider& p, const Query& q, const EntityDatabase& db,
                                   const RankingParams& params, bool hybrid) {
  return hybrid ? rank_hybrid(p, q, db, params) : rank_and_select(p, q, db, params);
}

void run_interactive(const ScoreProvider& provider, const EntityDatabase& db, const RankingParams& params) {
  if (provider.kind() != ProviderKind::kTfIdf && provider.kind() != ProviderKind::kEncoderService) {
    throw DataError("interactive mode needs a provider that scores raw text (tfidf or service)");
  }
  std::string line;
  for (std::size_t n = 1; std::getline(std::cin, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Query q;
    q.id = "interactive-" + std::to_string(n);
    q.text = line;
    std::cout << "query: " << line << '\n';
    const auto ranked = rank_and_select(provider, q, db, params);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& r = ranked[i];
      const auto* e = db.find_entity(r.entity_id);
      std::cout << i + 1 << ". " << r.entity_id << (e && !e->name.empty() ? " " + e->name : "") << "  "
                << std::fixed << std::setprecision(4) << r.item_score << '\n';
      for (const auto& s : r.top_snippets) {
        std::cout << "     " << std::fixed << std::setprecision(4) << s.score << "  "
                  << db.find_snippet(s.snippet_id)->text << '\n';
      }
    }
    std::cout << '\n' << std::flush;
  }
}

void cmd_rank(const RankOpts& o) {
  const auto db = load_nonempty_corpus(o.corpus.corpus, o.corpus.min_rating);
  const auto params = ranking_params(o.j, o.n, o.strict);
  const auto provider = make_provider(rank_method(o), db);
  if (o.interactive) {
    run_interactive(*provider, db, params);
    return;
  }
  if (o.queries.empty()) throw DataError("--queries is required unless --interactive is given");
  const auto queries = load_queries(o.queries);
  nlohmann::json out;
  if (!o.query_id.empty()) {
    out = to_json(rank_one(*provider, find_query(queries, o.query_id), db, params, o.hybrid));
  } else {
    out = nlohmann::json::object();
    for (const auto& q : queries) {
      // Without constraints the hybrid filter keeps every entity.
      out[q.id] = to_json(rank_one(*provider, q, db, params, o.hybrid && q.slot_constraints.has_value()));
    }
  }
  emit(o.out, [&](std::ostream& s) { s << out.dump(2) << '\n'; });
}

struct SampleOpts {
  CorpusOpts corpus;
  std::string queries;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  std::size_t j = 5;
  std::size_t n = 5;
  std::size_t k_entities = 5;
  std::size_t k_snippets = 5;
  bool no_hybrid = false;
  std::string out;
  std::string gold;
  std::string hits_out;
  std::string hits_manifest;
  std::size_t hit_size = 23;
  std::size_t gold_count = 3;
};

void cmd_sample(const SampleOpts& o) {
  const auto db = load_nonempty_corpus(o.corpus.corpus, o.corpus.min_rating);
  const auto queries = load_queries(o.queries);
  const auto params = ranking_params(o.j, o.n, false);
  std::vector<std::pair<std::string, std::unique_ptr<ScoreProvider>>> providers;
  for (const auto& text : o.methods) {
    const auto m = parse_method(text);
    for (const auto& [name, p] : providers) {
      if (name == m.name) throw DataError("duplicate method name '" + m.name + "'");
    }
    providers.emplace_back(m.name, make_provider(m, db));
  }

  std::vector<AnnotatedPair> sampled;
  for (const auto& q : queries) {
    for (const auto& [name, provider] : providers) {
      const auto ranked = rank_and_select(*provider, q, db, params);
      for (auto& p : sample_annotation_pairs(ranked, name, q, derive_seed(o.seed, {q.id, name}), o.k_entities,
                                             o.k_snippets)) {
        sampled.push_back(std::move(p));
      }
      if (o.no_hybrid || !q.slot_constraints) continue;
      const auto hybrid_name = name + "_a";
      try {
        const auto filtered = rank_hybrid(*provider, q, db, params);
        for (auto& p : sample_annotation_pairs(filtered, hybrid_name, q, derive_seed(o.seed, {q.id, hybrid_name}),
                                               o.k_entities, o.k_snippets)) {
          sampled.push_back(std::move(p));
        }
      } catch (const EmptyResultError&) {
        std::cerr << "snipq: note: query '" << q.id << "' matches no entity; skipped for " << hybrid_name << '\n';
      }
    }
  }
  const auto merged = merge_pairs(std::move(sampled));
  std::cerr << "pairs: " << merged.pairs.size() << " (collisions: " << merged.collisions.size() << ")\n";
  for (const auto& id : merged.collisions) std::cerr << "snipq: note: pair '" << id << "' chosen by several methods\n";
  emit(o.out, [&](std::ostream& s) { write_annotated_pairs(s, merged.pairs); });

  if (o.hits_out.empty()) return;
  if (o.gold.empty()) throw DataError("--hits-out needs --gold (annotated pairs with known labels)");
  const auto gold = load_annotated_pairs(o.gold);
  std::vector<std::string> ids, gold_ids;
  for (const auto& p : merged.pairs) ids.push_back(p.pair_id);
  std::map<std::string, std::pair<std::string, std::string>> pair_refs;
  for (const auto& p : merged.pairs) pair_refs[p.pair_id] = {p.query_id, p.snippet_id};
  for (const auto& p : gold) {
    gold_ids.push_back(p.pair_id);
    pair_refs[p.pair_id] = {p.query_id, p.snippet_id};
  }
  const auto hits = build_hits(ids, gold_ids, derive_seed(o.seed, {"hits"}), {o.hit_size, o.gold_count});
  const PairLookup lookup(db, queries);
  emit(o.hits_out, [&](std::ostream& s) {
    write_hits_csv(s, hits, [&](const std::string& id) {
      const auto& [qid, sid] = pair_refs.at(id);
      return std::make_pair(lookup.query(qid).text, lookup.snippet(sid).text);
    });
  });
  if (!o.hits_manifest.empty()) emit(o.hits_manifest, [&](std::ostream& s) { write_hits_manifest(s, hits); });
}

struct VoteOpts {
  std::string labels;
  std::string pairs;
  std::string out;
};

void cmd_vote(const VoteOpts& o) {
  const auto labels = load_labels(o.labels);
  std::vector<AnnotatedPair> sampled;
  if (!o.pairs.empty()) sampled = load_annotated_pairs(o.pairs);
  const auto aggregated =
      o.pairs.empty() ? aggregate_labels(labels) : aggregate_labels(labels, std::span<const AnnotatedPair>(sampled));
  std::size_t labelled = 0, positive = 0;
  for (const auto& p : aggregated) {
    labelled += p.majority.has_value();
    positive += p.majority.value_or(0) == 1;
  }
  std::cerr << "pairs: " << aggregated.size() << ", labelled: " << labelled << ", relevant: " << positive << '\n';
  emit(o.out, [&](std::ostream& s) { write_annotated_pairs(s, aggregated); });
}

struct KappaOpts {
  std::string annotated;
};

void cmd_kappa(const KappaOpts& o) {
  const auto pairs = load_annotated_pairs(o.annotated);
  std::map<std::string, std::size_t> annotators;
  std::optional<std::size_t> raters;
  bool uniform = true;
  std::vector<std::vector<int>> counts;
  for (const auto& p : pairs) {
    if (p.labels.empty()) continue;
    for (const auto& [a, l] : p.labels) ++annotators[a];
    if (raters && *raters != p.labels.size()) uniform = false;
    raters = p.labels.size();
    std::vector<int> row(2, 0);
    for (const auto& [a, l] : p.labels) ++row.at(static_cast<std::size_t>(l));
    counts.push_back(std::move(row));
  }
  if (counts.empty()) throw EmptyResultError("no labelled pairs in " + o.annotated);
  std::cout << std::fixed << std::setprecision(3);
  if (uniform) {
    std::cout << "fleiss_kappa: " << fleiss_kappa(counts, static_cast<int>(*raters)) << " (" << counts.size()
              << " pairs, " << *raters << " raters each)\n";
  } else {
    std::cout << "fleiss_kappa: n/a (pairs have different rater counts)\n";
  }
  for (const auto& [a, n] : annotators) {
    std::cout << "annotator " << a << " vs majority: ";
    try {
      std::cout << annotator_vs_majority_kappa(pairs, a);
    } catch (const DataError& e) {
      std::cout << "n/a (" << e.what() << ")";
    }
    std::cout << " (" << n << " pairs)\n";
  }
}

struct EvalOpts {
  CorpusOpts corpus;
  std::string queries;
  std::string annotated;
  std::vector<std::string> methods;
  bool baseline = false;
  double threshold = kDefaultThreshold;
  std::size_t kfold = 0;
  std::optional<std::uint64_t> seed;
  bool no_stratify = false;
  bool retrieval = false;
  std::size_t k_snippets = 5;
  std::string json_out;
};

void cmd_eval(const EvalOpts& o) {
  const auto db = load_nonempty_corpus(o.corpus.corpus, o.corpus.min_rating);
  const auto queries = load_queries(o.queries);
  const auto all = load_annotated_pairs(o.annotated);
  std::vector<AnnotatedPair> pairs;
  for (const auto& p : all) {
    if (p.majority) pairs.push_back(p);
  }
  if (pairs.empty()) throw EmptyResultError("no pairs with a majority label in " + o.annotated);
  if (o.kfold > 0 && !o.seed) throw DataError("--kfold needs an explicit --seed");
  const PairLookup lookup(db, queries);

  nlohmann::json report = nlohmann::json::object();
  std::vector<std::pair<std::string, MetricsReport>> rows;
  if (o.baseline) {
    std::vector<int> golds;
    for (const auto& p : pairs) golds.push_back(*p.majority);
    const std::vector<int> ones(golds.size(), 1);
    rows.emplace_back("Always-relevant", classification_metrics(ones, golds));
  }
  for (const auto& text : o.methods) {
    const auto m = parse_method(text);
    const auto provider = make_provider(m, db);
    if (o.kfold > 0) {
      const auto cv = cross_validate_provider(*provider, pairs, lookup, o.threshold, o.kfold, *o.seed, !o.no_stratify);
      auto folds = nlohmann::json::array();
      for (const auto& f : cv.folds) folds.push_back(to_json(f));
      report["kfold"][m.name] = folds;
      rows.emplace_back(m.name, cv.mean);
    } else {
      rows.emplace_back(m.name, evaluate_provider(*provider, pairs, lookup, o.threshold));
    }
  }
  if (!rows.empty()) {
    std::cout << format_metrics_table(rows);
    for (const auto& [name, r] : rows) report["classification"][name] = to_json(r);
  }

  if (o.retrieval) {
    std::vector<std::string> methods;
    for (const auto& p : pairs) {
      for (const auto& m : p.source_methods) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
      }
    }
    std::vector<std::pair<std::string, RetrievalReport>> rrows;
    for (const auto& m : methods) {
      rrows.emplace_back(m, retrieval_metrics(judgements_for_method(pairs, queries, m), o.k_snippets));
      report["retrieval"][m] = to_json(rrows.back().second);
    }
    if (!rows.empty()) std::cout << '\n';
    std::cout << format_retrieval_table(rrows);
  }
  if (rows.empty() && !o.retrieval) throw DataError("nothing to evaluate: pass --method, --baseline or --retrieval");
  if (!o.json_out.empty()) emit(o.json_out, [&](std::ostream& s) { s << report.dump(2) << '\n'; });
}

struct EncodeOpts {
  CorpusOpts corpus;
  std::string queries;
  std::string url;
  std::string out;
  std::size_t batch = 64;
  int timeout_ms = 30000;
};

void cmd_encode(const EncodeOpts& o) {
  const auto db = load_nonempty_corpus(o.corpus.corpus, o.corpus.min_rating);
  const auto queries = load_queries(o.queries);
  const EncoderClient client(service_url(o.url), std::chrono::milliseconds(o.timeout_ms));
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& q : queries) items.emplace_back(q.id, q.text);
  for (const auto& s : db.snippets()) items.emplace_back(s.id, s.text);

  EmbeddingStore store;
  const auto batch = std::max<std::size_t>(1, o.batch);
  for (std::size_t begin = 0; begin < items.size(); begin += batch) {
    const auto end = std::min(items.size(), begin + batch);
    std::vector<std::string> texts;
    for (auto i = begin; i < end; ++i) texts.push_back(items[i].second);
    auto vectors = fetch_embeddings(client, texts);
    for (auto i = begin; i < end; ++i) store.insert(items[i].first, std::move(vectors[i - begin]));
  }
  emit(o.out, [&](std::ostream& s) { write_embeddings(s, store); });
  std::cerr << "encoded " << store.size() << " texts, dimension " << store.dimension() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snipq: snippet retrieval, annotation and evaluation for restaurant search"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  IngestOpts ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate a corpus and report entity, snippet and vocabulary counts");
  add_corpus(c_ingest, ingest.corpus);
  c_ingest->add_option("--index-out", ingest.index_out, "write the TF-IDF index to this file");

  RankOpts rank;
  auto* c_rank = app.add_subcommand("rank", "rank entities for queries by their top snippets");
  add_corpus(c_rank, rank.corpus);
  c_rank->add_option("--queries", rank.queries, "query JSON-Lines file");
  auto* qid = c_rank->add_option("--query-id", rank.query_id, "rank a single query (default: every query)");
  c_rank->add_flag("--interactive", rank.interactive, "read query texts from stdin, one per line")->excludes(qid);
  c_rank->add_option("--provider", rank.provider, "tfidf, embedding, table, nli or service")->capture_default_str();
  c_rank->add_option("--index", rank.index, "prebuilt TF-IDF index (tfidf provider)");
  c_rank->add_option("--embeddings", rank.embeddings, "embedding JSON-Lines file (embedding provider)");
  c_rank->add_option("--scores", rank.scores, "score CSV (table or nli provider)");
  c_rank->add_option("--service-url", rank.url, std::string("encoder service URL (service provider; default $") +
                                                    kEncoderEnv + ")");
  c_rank->add_option("-J,--top-snippets", rank.j, "snippets averaged per entity")->capture_default_str();
  c_rank->add_option("-N,--top-entities", rank.n, "entities returned")->capture_default_str();
  c_rank->add_flag("--hybrid", rank.hybrid, "filter entities by the query's slot constraints first");
  c_rank->add_flag("--strict", rank.strict, "divide by J even when an entity has fewer snippets");
  c_rank->add_option("--out", rank.out, "output file (default stdout)");

  SampleOpts sample;
  auto* c_sample = app.add_subcommand("sample", "sample query-snippet pairs for crowd labelling");
  add_corpus(c_sample, sample.corpus);
  c_sample->add_option("--queries", sample.queries, "query JSON-Lines file")->required();
  c_sample->add_option("--method", sample.methods, "scorer as NAME=KIND[:PATH]; repeatable")->required();
  c_sample->add_option("--seed", sample.seed, "seed for every random draw")->required();
  c_sample->add_option("-J,--top-snippets", sample.j, "snippets averaged per entity")->capture_default_str();
  c_sample->add_option("-N,--top-entities", sample.n, "entities ranked per query")->capture_default_str();
  c_sample->add_option("--k-entities", sample.k_entities, "draw among this many top entities")->capture_default_str();
  c_sample->add_option("--k-snippets", sample.k_snippets, "pairs emitted per draw")->capture_default_str();
  c_sample->add_flag("--no-hybrid", sample.no_hybrid, "skip the slot-filtered pass for constrained queries");
  c_sample->add_option("--out", sample.out, "pairs JSON-Lines output (default stdout)");
  c_sample->add_option("--gold", sample.gold, "annotated pairs used as quality probes");
  c_sample->add_option("--hits-out", sample.hits_out, "crowd task CSV pair_id,query_text,snippet_text");
  c_sample->add_option("--hits-manifest", sample.hits_manifest, "JSON-Lines listing each task's pairs");
  c_sample->add_option("--hit-size", sample.hit_size, "pairs per task, probes included")->capture_default_str();
  c_sample->add_option("--gold-count", sample.gold_count, "probes per task")->capture_default_str();

  VoteOpts vote;
  auto* c_vote = app.add_subcommand("vote", "aggregate crowd labels by majority vote");
  c_vote->add_option("--labels", vote.labels, "label CSV pair_id,query_id,snippet_id,annotator_id,label")->required();
  c_vote->add_option("--pairs", vote.pairs, "sampled pairs; fixes output order and source methods");
  c_vote->add_option("--out", vote.out, "annotated JSON-Lines output (default stdout)");

  KappaOpts kappa;
  auto* c_kappa = app.add_subcommand("kappa", "agreement of crowd labels");
  c_kappa->add_option("--annotated", kappa.annotated, "annotated JSON-Lines file")->required();

  EvalOpts eval;
  auto* c_eval = app.add_subcommand("eval", "classification and retrieval metrics against majority labels");
  add_corpus(c_eval, eval.corpus);
  c_eval->add_option("--queries", eval.queries, "query JSON-Lines file")->required();
  c_eval->add_option("--annotated", eval.annotated, "annotated JSON-Lines file")->required();
  c_eval->add_option("--method", eval.methods, "scorer as NAME=KIND[:PATH]; repeatable");
  c_eval->add_flag("--baseline", eval.baseline, "add the always-relevant row");
  c_eval->add_option("--threshold", eval.threshold, "scores at or above this are relevant")->capture_default_str();
  c_eval->add_option("--kfold", eval.kfold, "evaluate per fold and report the fold mean");
  c_eval->add_option("--seed", eval.seed, "fold assignment seed (required with --kfold)");
  c_eval->add_flag("--no-stratify", eval.no_stratify, "plain shuffled folds");
  c_eval->add_flag("--retrieval", eval.retrieval, "retrieval metrics per source method");
  c_eval->add_option("--k-snippets", eval.k_snippets, "labels allowed per query and method")->capture_default_str();
  c_eval->add_option("--json", eval.json_out, "also write the full report as JSON");

  EncodeOpts encode;
  auto* c_encode = app.add_subcommand("encode", "fetch query and snippet embeddings from the encoder service");
  add_corpus(c_encode, encode.corpus);
  c_encode->add_option("--queries", encode.queries, "query JSON-Lines file")->required();
  c_encode->add_option("--service-url", encode.url, std::string("encoder service URL (default $") + kEncoderEnv + ")");
  c_encode->add_option("--out", encode.out, "embedding JSON-Lines output")->required();
  c_encode->add_option("--batch", encode.batch, "texts per request")->capture_default_str();
  c_encode->add_option("--timeout-ms", encode.timeout_ms, "per-request timeout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_ingest) cmd_ingest(ingest);
    else if (*c_rank) cmd_rank(rank);
    else if (*c_sample) cmd_sample(sample);
    else if (*c_vote) cmd_vote(vote);
    else if (*c_kappa) cmd_kappa(kappa);
    else if (*c_eval) cmd_eval(eval);
    else if (*c_encode) cmd_encode(encode);
  } catch (const IoError& e) {
    std::cerr << "snipq: error: " << e.what() << '\n';
    return 2;
  } catch (const EmptyResultError& e) {
    std::cerr << "snipq: error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "snipq: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "snipq: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
