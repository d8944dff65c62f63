#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "run_cli.hpp"
#include "snipq/annotation.hpp"
#include "snipq/evaluation.hpp"
#include "snipq/tfidf.hpp"
#include "stub_encoder.hpp"
#include "test_paths.hpp"

using namespace snipq;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using testing::run_cli;

namespace {

const std::string kCorpus = testing::data("synthetic/corpus.jsonl").string();
const std::string kQueries = testing::data("synthetic/queries.jsonl").string();
const std::string kTwoQueries = testing::data("fixtures/sample_queries.jsonl").string();

// Three annotators; the labels depend only on the pair id.
std::string labels_for(const std::vector<AnnotatedPair>& pairs, bool drop_last_label = false) {
  std::ostringstream out;
  out << "pair_id,query_id,snippet_id,annotator_id,label\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const auto h = std::hash<std::string>{}(p.pair_id);
    const int raters = drop_last_label && i + 1 == pairs.size() ? 2 : 3;
    for (int a = 0; a < raters; ++a) {
      out << p.pair_id << ',' << p.query_id << ',' << p.snippet_id << ",w" << a << ',' << ((h >> a) & 1U) << '\n';
    }
  }
  return out.str();
}

std::vector<AnnotatedPair> parse_pairs(const std::string& text) {
  std::istringstream in(text);
  return parse_annotated_pairs(in, "stdout");
}

}  // namespace

TEST_CASE("ingest reports fixture counts", "[cli]") {
  const auto r = run_cli({"ingest", "--corpus", testing::data("fixtures/two_entities.jsonl").string()});
  REQUIRE(r.code == 0);
  const auto db = load_corpus(testing::data("fixtures/two_entities.jsonl"));
  const auto vocab = TfIdfIndex::build(db.snippets()).vocabulary_size();
  CHECK(r.out == "entities: 2\nsnippets: 10\nvocabulary: " + std::to_string(vocab) + "\n");
}

TEST_CASE("ingest error exit codes", "[cli]") {
  const auto missing = run_cli({"ingest", "--corpus", "/no/such/corpus.jsonl"});
  CHECK(missing.code == 2);
  CHECK_THAT(missing.err, ContainsSubstring("/no/such/corpus.jsonl"));

  testing::TempDir tmp;
  const auto empty = run_cli({"ingest", "--corpus", tmp.write("empty.jsonl", "").string()});
  CHECK(empty.code == 1);
  CHECK_THAT(empty.err, ContainsSubstring("empty corpus"));

  const auto bad = run_cli({"ingest", "--corpus", tmp.write("bad.jsonl", "{\"id\":\"a\",\"price_range\":\"x\"}\n").string()});
  CHECK(bad.code == 1);
  CHECK_THAT(bad.err, ContainsSubstring("bad.jsonl:1"));

  CHECK(run_cli({"ingest"}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
}

TEST_CASE("ingest writes a loadable index", "[cli]") {
  testing::TempDir tmp;
  const auto path = (tmp / "index.tfidf").string();
  REQUIRE(run_cli({"ingest", "--corpus", kCorpus, "--index-out", path}).code == 0);
  const auto a = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q03", "--index", path});
  const auto b = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q03"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("rank is deterministic and matches the oracle", "[cli]") {
  const std::vector<std::string> args{"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q01"};
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  REQUIRE(first.code == 0);
  CHECK(first.out == second.out);

  std::ifstream in(testing::data("synthetic/expected_rank_tfidf.json"));
  const auto want = nlohmann::json::parse(in)["q01"]["plain"];
  const auto got = nlohmann::json::parse(first.out);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i]["entity_id"] == want[i]["entity_id"]);
    CHECK_THAT(got[i]["item_score"].get<double>(), WithinAbs(want[i]["item_score"].get<double>(), 1e-12));
  }

  const auto hybrid = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q07", "--hybrid"});
  REQUIRE(hybrid.code == 0);
  const auto h = nlohmann::json::parse(hybrid.out);
  REQUIRE(h.size() == 2);
  CHECK(h[0]["entity_id"] == "s04");

  const auto every = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "-N", "2", "--hybrid"});
  REQUIRE(every.code == 0);
  CHECK(nlohmann::json::parse(every.out).size() == 8);
}

TEST_CASE("rank error exit codes", "[cli]") {
  testing::TempDir tmp;
  const auto q = tmp.write("q.jsonl", "{\"id\":\"qx\",\"text\":\"thai curry\",\"category\":\"schema\","
                                      "\"slot_constraints\":{\"cuisine\":\"thai\"}}\n");
  const auto none = run_cli({"rank", "--corpus", kCorpus, "--queries", q.string(), "--query-id", "qx", "--hybrid"});
  CHECK(none.code == 3);
  CHECK_THAT(none.err, ContainsSubstring("no entity matches constraints"));

  CHECK(run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "nope"}).code == 1);
  CHECK(run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q01", "-J", "0"}).code == 1);
  const auto table = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q01", "--provider",
                              "table", "--scores", "/no/scores.csv"});
  CHECK(table.code == 2);
  const auto unresolved = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q01",
                                   "--provider", "table", "--scores", testing::data("fixtures/scores.csv").string()});
  CHECK(unresolved.code == 1);
  CHECK_THAT(unresolved.err, ContainsSubstring("cannot score pair (q01, s01#"));
}

TEST_CASE("interactive rank", "[cli]") {
  const auto r = run_cli({"rank", "--corpus", kCorpus, "--interactive", "-N", "1", "-J", "1"},
                         "cosy pub with a fireplace\n\n");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("query: cosy pub with a fireplace"));
  CHECK_THAT(r.out, ContainsSubstring("1. s01"));
  const auto table = run_cli({"rank", "--corpus", kCorpus, "--interactive", "--provider", "table", "--scores",
                              testing::data("fixtures/scores.csv").string()},
                             "x\n");
  CHECK(table.code == 1);
}

TEST_CASE("sample, vote, kappa and eval", "[cli]") {
  testing::TempDir tmp;
  const auto pairs_path = (tmp / "pairs.jsonl").string();
  const auto r = run_cli({"sample", "--corpus", kCorpus, "--queries", kTwoQueries, "--method", "tfidf=tfidf", "--seed",
                          "5", "--out", pairs_path});
  REQUIRE(r.code == 0);
  const auto sampled = load_annotated_pairs(pairs_path);
  CHECK(sampled.size() == 10);
  CHECK_THAT(r.err, ContainsSubstring("pairs: 10"));

  const auto again = run_cli({"sample", "--corpus", kCorpus, "--queries", kTwoQueries, "--method", "tfidf=tfidf",
                              "--seed", "5"});
  CHECK(again.out == testing::slurp(pairs_path));

  CHECK(run_cli({"sample", "--corpus", kCorpus, "--queries", kTwoQueries, "--method", "tfidf"}).code == 1);
  CHECK(run_cli({"sample", "--corpus", kCorpus, "--queries", kTwoQueries, "--method", "x=bogus", "--seed", "1"})
            .code == 1);

  // Two labels on one pair.
  const auto bad_labels = tmp.write("bad.csv", labels_for(sampled, true));
  const auto bad = run_cli({"vote", "--labels", bad_labels.string()});
  CHECK(bad.code == 1);
  CHECK_THAT(bad.err, ContainsSubstring(sampled.back().pair_id));

  const auto labels = tmp.write("labels.csv", labels_for(sampled));
  const auto annotated = (tmp / "annotated.jsonl").string();
  const auto voted = run_cli({"vote", "--labels", labels.string(), "--pairs", pairs_path, "--out", annotated});
  REQUIRE(voted.code == 0);
  const auto pairs = load_annotated_pairs(annotated);
  REQUIRE(pairs.size() == 10);
  CHECK(pairs[0].source_methods == std::vector<std::string>{"tfidf"});
  std::vector<int> golds;
  for (const auto& p : pairs) golds.push_back(p.majority.value());

  const auto k = run_cli({"kappa", "--annotated", annotated});
  CHECK(k.code == 0);
  CHECK_THAT(k.out, ContainsSubstring("annotator w0 vs majority"));

  // A constant-1 table reduces to the always-relevant baseline.
  std::string csv = "query_id,snippet_id,score\n";
  for (const auto& p : pairs) csv += p.query_id + "," + p.snippet_id + ",1.0\n";
  const auto table = tmp.write("const.csv", csv);
  const auto json_path = (tmp / "report.json").string();
  const auto ev = run_cli({"eval", "--corpus", kCorpus, "--queries", kTwoQueries, "--annotated", annotated, "--baseline",
                           "--method", "const=table:" + table.string(), "--retrieval", "--json", json_path});
  REQUIRE(ev.code == 0);
  const auto report = nlohmann::json::parse(testing::slurp(json_path));
  const auto expected = classification_metrics(std::vector<int>(golds.size(), 1), golds);
  CHECK(report["classification"]["const"]["avg_precision"].get<double>() == expected.avg_precision);
  CHECK(report["classification"]["const"]["weighted_f1"].get<double>() ==
        report["classification"]["Always-relevant"]["weighted_f1"].get<double>());
  CHECK(report["retrieval"]["tfidf"]["overall"]["pairs"] == 10);
  CHECK_THAT(ev.out, ContainsSubstring("Avg Precision"));

  const auto cv = run_cli({"eval", "--corpus", kCorpus, "--queries", kTwoQueries, "--annotated", annotated, "--method",
                           "const=table:" + table.string(), "--kfold", "2"});
  CHECK(cv.code == 1);
  CHECK_THAT(cv.err, ContainsSubstring("--seed"));
  const auto cv2 = run_cli({"eval", "--corpus", kCorpus, "--queries", kTwoQueries, "--annotated", annotated, "--method",
                            "const=table:" + table.string(), "--kfold", "2", "--seed", "3"});
  CHECK(cv2.code == 0);
}

TEST_CASE("sample writes crowd tasks", "[cli]") {
  testing::TempDir tmp;
  const auto gold = tmp.write("gold.jsonl",
                              "{\"pair_id\":\"q01|s01#review#0\",\"query_id\":\"q01\",\"snippet_id\":\"s01#review#0\","
                              "\"source_methods\":[],\"labels\":{},\"majority\":1}\n"
                              "{\"pair_id\":\"q01|s02#review#0\",\"query_id\":\"q01\",\"snippet_id\":\"s02#review#0\","
                              "\"source_methods\":[],\"labels\":{},\"majority\":0}\n"
                              "{\"pair_id\":\"q02|s03#review#0\",\"query_id\":\"q02\",\"snippet_id\":\"s03#review#0\","
                              "\"source_methods\":[],\"labels\":{},\"majority\":0}\n");
  const auto hits = (tmp / "hits.csv").string();
  const auto r = run_cli({"sample", "--corpus", kCorpus, "--queries", kQueries, "--method", "tfidf=tfidf", "--seed",
                          "9", "--gold", gold.string(), "--hits-out", hits, "--hits-manifest",
                          (tmp / "hits.jsonl").string()});
  REQUIRE(r.code == 0);
  const auto csv = testing::slurp(hits);
  CHECK(csv.rfind("pair_id,query_text,snippet_text\n", 0) == 0);
  // 8 plain passes and 2 filtered ones, 5 pairs each; every task adds 3 probes.
  const auto pairs = parse_pairs(r.out);
  const auto tasks = (pairs.size() + 19) / 20;
  CHECK(pairs.size() == 50);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 1 + pairs.size() + 3 * tasks);
}

TEST_CASE("encode populates an embedding file the ranker can use", "[cli][http]") {
  testing::StubEncoder stub(
      [](const nlohmann::json& req) {
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& t : req["texts"]) vectors.push_back(testing::fake_vector(t.get<std::string>()));
        return nlohmann::json{{"vectors", vectors}, {"dimension", 3}};
      },
      [](const nlohmann::json&) { return nlohmann::json{{"scores", nlohmann::json::array()}}; });
  testing::TempDir tmp;
  const auto emb = (tmp / "emb.jsonl").string();
  const auto r = run_cli({"encode", "--service-url", stub.url(), "--corpus", kCorpus, "--queries", kQueries, "--out",
                          emb, "--batch", "7"});
  REQUIRE(r.code == 0);
  const auto store = load_embeddings(emb);
  CHECK(store.size() == 8 + load_corpus(kCorpus).snippets().size());
  const auto ranked = run_cli({"rank", "--corpus", kCorpus, "--queries", kQueries, "--query-id", "q02", "--provider",
                               "embedding", "--embeddings", emb});
  CHECK(ranked.code == 0);
  CHECK(nlohmann::json::parse(ranked.out).size() == 5);

  CHECK(run_cli({"encode", "--corpus", kCorpus, "--queries", kQueries, "--out", emb}).code == 1);
  CHECK(run_cli({"encode", "--service-url", "http://127.0.0.1:1", "--timeout-ms", "300", "--corpus", kCorpus,
                 "--queries", kQueries, "--out", emb})
            .code == 2);
}

TEST_CASE("help lists every subcommand", "[cli]") {
  const auto r = run_cli({"--help"});
  CHECK(r.code == 0);
  for (const char* sub : {"ingest", "rank", "sample", "vote", "kappa", "eval", "encode"}) {
    CHECK_THAT(r.out, ContainsSubstring(sub));
  }
  const auto rank = run_cli({"rank", "--help"});
  CHECK_THAT(rank.out, ContainsSubstring("--hybrid"));
  CHECK_THAT(rank.out, ContainsSubstring("--interactive"));
}
