#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <set>

#include "label_sets.hpp"
#include "oracles.hpp"
#include "snipq/evaluation.hpp"
#include "test_paths.hpp"

using namespace snipq;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

class ConstantProvider final : public ScoreProvider {
 public:
  explicit ConstantProvider(double v) : v_(v) {}
  ProviderKind kind() const override { return ProviderKind::kScoreTable; }
  std::string name() const override { return "constant"; }
  std::unique_ptr<BoundQuery> bind(const Query&) const override { return std::make_unique<Bound>(v_); }

 private:
  struct Bound final : BoundQuery {
    explicit Bound(double v) : v(v) {}
    double score(const Snippet&) const override { return v; }
    double v;
  };
  double v_;
};

std::vector<int> always(int v, std::size_t n) { return std::vector<int>(n, v); }

// Pairs over the two-entity fixture: the snippets cycle, the labels are given.
struct LabelledFixture {
  EntityDatabase db = load_corpus(testing::data("fixtures/two_entities.jsonl"));
  std::vector<Query> queries;
  std::vector<AnnotatedPair> pairs;

  explicit LabelledFixture(const std::vector<int>& golds) {
    for (const char* id : {"q1", "q2"}) {
      Query q;
      q.id = id;
      q.text = "t";
      queries.push_back(q);
    }
    const auto snippets = db.snippets();
    for (std::size_t i = 0; i < golds.size(); ++i) {
      AnnotatedPair p;
      p.query_id = queries[i % 2].id;
      p.snippet_id = snippets[i % snippets.size()].id;
      p.pair_id = p.query_id + "|" + p.snippet_id + "|" + std::to_string(i);
      p.majority = golds[i];
      pairs.push_back(std::move(p));
    }
  }
};

}  // namespace

TEST_CASE("classify", "[evaluation]") {
  CHECK(classify(0.6, 0.5) == 1);
  CHECK(classify(0.5, 0.5) == 1);
  CHECK(classify(-0.2, 0.5) == 0);
  CHECK(classify(std::nextafter(0.5, 0.0), 0.5) == 0);
}

TEST_CASE("always-relevant baseline", "[evaluation]") {
  const auto gold = testing::gold_labels(490, 510);
  const auto r = classification_metrics(always(1, gold.size()), gold);
  CHECK_THAT(r.avg_precision, WithinAbs(0.240, 0.001));
  CHECK_THAT(r.avg_recall, WithinAbs(0.490, 0.001));
  CHECK_THAT(r.weighted_f1, WithinAbs(0.322, 0.001));
  // Frozen from tests/oracles/metrics_oracle.py.
  CHECK_THAT(r.avg_precision, WithinAbs(0.2401, 1e-12));
  CHECK_THAT(r.weighted_f1, WithinAbs(0.32228187919463086, 1e-12));
  CHECK(r.per_class[0].precision == 0.0);
}

TEST_CASE("always-positive closed form", "[evaluation][property]") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pos(1, 999);
  for (int trial = 0; trial < 500; ++trial) {
    const auto k = pos(rng);
    const double p = static_cast<double>(k) / 1000.0;
    const auto gold = testing::gold_labels(k, 1000 - k);
    const auto r = classification_metrics(always(1, 1000), gold);
    CHECK_THAT(r.avg_precision, WithinAbs(p * p, 1e-12));
    CHECK_THAT(r.avg_recall, WithinAbs(p, 1e-12));
    CHECK_THAT(r.weighted_f1, WithinAbs(p * 2 * p / (1 + p), 1e-12));
  }
}

TEST_CASE("classification_metrics examples", "[evaluation]") {
  const std::vector<int> gold{1, 0, 1, 1, 0};
  const auto perfect = classification_metrics(gold, gold);
  CHECK(perfect.avg_precision == 1.0);
  CHECK(perfect.avg_recall == 1.0);
  CHECK(perfect.weighted_f1 == 1.0);

  // tp=2, fp=1, tn=3, fn=2. Frozen from tests/oracles/metrics_oracle.py.
  const std::vector<int> pred{1, 1, 1, 0, 0, 0, 0, 0};
  const std::vector<int> g2{1, 1, 0, 0, 0, 0, 1, 1};
  const auto r = classification_metrics(pred, g2);
  CHECK(r.confusion == ConfusionMatrix{2, 1, 3, 2});
  CHECK_THAT(r.per_class[0].precision, WithinAbs(0.6, 1e-12));
  CHECK_THAT(r.per_class[0].recall, WithinAbs(0.75, 1e-12));
  CHECK_THAT(r.per_class[0].f1, WithinAbs(0.6666666666666665, 1e-12));
  CHECK_THAT(r.per_class[1].precision, WithinAbs(0.6666666666666666, 1e-12));
  CHECK_THAT(r.per_class[1].recall, WithinAbs(0.5, 1e-12));
  CHECK_THAT(r.per_class[1].f1, WithinAbs(0.5714285714285715, 1e-12));
  CHECK(r.per_class[0].support == 4);
  CHECK_THAT(r.avg_precision, WithinAbs(0.6333333333333333, 1e-12));
  CHECK_THAT(r.avg_recall, WithinAbs(0.625, 1e-12));
  CHECK_THAT(r.weighted_f1, WithinAbs(0.6190476190476191, 1e-12));

  CHECK_THROWS_AS(classification_metrics(std::vector<int>{1}, std::vector<int>{1, 0}), DataError);
  CHECK_THROWS_AS(classification_metrics(std::vector<int>{}, std::vector<int>{}), DataError);
  CHECK_THROWS_AS(classification_metrics(std::vector<int>{2}, std::vector<int>{1}), DataError);
}

TEST_CASE("metrics match the brute-force oracle and are label-swap symmetric", "[evaluation][property]") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> len(1, 1000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = len(rng);
    const double bias_p = u(rng), bias_g = u(rng);
    std::vector<int> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = u(rng) < bias_p;
      gold[i] = u(rng) < bias_g;
    }
    const auto r = classification_metrics(pred, gold);
    const auto o = oracle::metrics(pred, gold);
    CHECK_THAT(r.avg_precision, WithinAbs(o.wp, 1e-12));
    CHECK_THAT(r.avg_recall, WithinAbs(o.wr, 1e-12));
    CHECK_THAT(r.weighted_f1, WithinAbs(o.wf, 1e-12));
    for (int c = 0; c < 2; ++c) CHECK_THAT(r.per_class[static_cast<std::size_t>(c)].f1, WithinAbs(o.f[c], 1e-12));

    auto sp = pred, sg = gold;
    for (auto& x : sp) x = 1 - x;
    for (auto& x : sg) x = 1 - x;
    const auto s = classification_metrics(sp, sg);
    CHECK_THAT(s.avg_precision, WithinAbs(r.avg_precision, 1e-12));
    CHECK_THAT(s.avg_recall, WithinAbs(r.avg_recall, 1e-12));
    CHECK_THAT(s.weighted_f1, WithinAbs(r.weighted_f1, 1e-12));
  }
}

TEST_CASE("retrieval_metrics", "[evaluation]") {
  const auto r = retrieval_metrics(testing::tfidf_retrieval_judgements());
  CHECK(r.overall.pairs == 500);
  CHECK(r.overall.relevant == 325);
  CHECK(r.overall.snippet_relevance_pct == 65.0);
  CHECK(r.overall.pct_at_least_one == 83.0);
  CHECK(r.overall.avg_relevant == 3.25);
  CHECK(r.by_category.size() == 3);

  const std::vector<QueryJudgements> all{{"a", QueryCategory::kMenuItem, {1, 1, 1, 1, 1}},
                                         {"b", QueryCategory::kMenuItem, {1, 1, 1, 1, 1}}};
  const auto full = retrieval_metrics(all);
  CHECK(full.overall.snippet_relevance_pct == 100.0);
  CHECK(full.overall.pct_at_least_one == 100.0);
  CHECK(full.overall.avg_relevant == 5.0);

  const std::vector<QueryJudgements> two{{"a", QueryCategory::kObjective, {1, 0, 0, 0, 0}},
                                         {"b", QueryCategory::kSubjective, {0, 0, 0, 0, 0}}};
  const auto small = retrieval_metrics(two);
  CHECK(small.overall.snippet_relevance_pct == 10.0);
  CHECK(small.overall.pct_at_least_one == 50.0);
  CHECK(small.overall.avg_relevant == 0.5);
  CHECK(small.by_category.at(QueryCategory::kObjective).snippet_relevance_pct == 20.0);
  CHECK(small.by_category.at(QueryCategory::kSubjective).pct_at_least_one == 0.0);

  CHECK_THROWS_AS(retrieval_metrics(std::vector<QueryJudgements>{}), DataError);
  const std::vector<QueryJudgements> six{{"a", QueryCategory::kObjective, {1, 0, 0, 0, 0, 1}}};
  CHECK_THROWS_WITH(retrieval_metrics(six), ContainsSubstring("'a'"));

  const auto table = format_retrieval_table({{"Cos-TF-IDF", r}});
  CHECK_THAT(table, ContainsSubstring("65.0%"));
  CHECK_THAT(table, ContainsSubstring("83.0%"));
  CHECK_THAT(table, ContainsSubstring("3.25"));
}

TEST_CASE("retrieval percentage identity", "[evaluation][property]") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> nq(1, 40), len(0, 5), bit(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<QueryJudgements> js;
    for (int q = 0, n = nq(rng); q < n; ++q) {
      QueryJudgements j{"q" + std::to_string(q), static_cast<QueryCategory>(q % 3), {}};
      for (int i = 0, m = len(rng); i < m; ++i) j.labels.push_back(bit(rng));
      js.push_back(std::move(j));
    }
    const auto r = retrieval_metrics(js).overall;
    if (r.pairs == 0) continue;
    CHECK_THAT(r.snippet_relevance_pct * static_cast<double>(r.pairs), WithinAbs(100.0 * r.relevant, 1e-9));
    CHECK(r.avg_relevant <= 5.0);
  }
}

TEST_CASE("judgements_for_method", "[evaluation]") {
  std::vector<Query> queries(2);
  queries[0].id = "q1";
  queries[0].category = QueryCategory::kMenuItem;
  queries[1].id = "q2";
  std::vector<AnnotatedPair> pairs{{"q2|a", "q2", "a", {"tfidf"}, {}, 1},
                                   {"q1|b", "q1", "b", {"tfidf", "bert"}, {}, 0},
                                   {"q1|c", "q1", "c", {"bert"}, {}, 1}};
  const auto j = judgements_for_method(pairs, queries, "tfidf");
  REQUIRE(j.size() == 2);
  CHECK(j[0].query_id == "q1");
  CHECK(j[0].labels == std::vector<int>{0});
  CHECK(j[1].labels == std::vector<int>{1});
  pairs.push_back({"q9|a", "q9", "a", {"tfidf"}, {}, 1});
  CHECK_THROWS_WITH(judgements_for_method(pairs, queries, "tfidf"), ContainsSubstring("q9"));
}

TEST_CASE("kfold_splits", "[evaluation]") {
  const auto loo = kfold_splits(testing::gold_labels(3, 4), 7, 1);
  for (const auto& f : loo) CHECK(f.size() == 1);

  const auto labels = testing::gold_labels(6, 4);
  const auto two = kfold_splits(labels, 2, 5);
  for (const auto& f : two) {
    CHECK(f.size() == 5);
    CHECK(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == 1; }) == 3);
  }

  const auto big = testing::gold_labels(838, 872);
  const auto folds = kfold_splits(big, 10, 11);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    CHECK(f.size() == 171);
    const auto pos = std::count_if(f.begin(), f.end(), [&](std::size_t i) { return big[i] == 1; });
    CHECK(std::abs(static_cast<double>(pos) - 83.8) <= 1.0);
    seen.insert(f.begin(), f.end());
    CHECK(std::is_sorted(f.begin(), f.end()));
  }
  CHECK(seen.size() == 1710);
  CHECK(kfold_splits(big, 10, 11) == folds);
  CHECK(kfold_splits(big, 10, 12) != folds);

  const auto plain = kfold_splits(big, 10, 11, false);
  for (const auto& f : plain) CHECK(f.size() == 171);

  CHECK_THROWS_AS(kfold_splits(labels, 11, 1), DataError);
  CHECK_THROWS_AS(kfold_splits(labels, 1, 1), DataError);
}

TEST_CASE("kfold partition property", "[evaluation][property]") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> len(2, 300), bit(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = len(rng);
    std::uniform_int_distribution<std::size_t> kk(2, std::min<std::size_t>(n, 12));
    const auto k = kk(rng);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(bit(rng));
    const auto folds = kfold_splits(labels, k, trial);
    std::vector<std::size_t> all;
    const double positives = std::accumulate(labels.begin(), labels.end(), 0.0);
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      all.insert(all.end(), f.begin(), f.end());
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      const auto pos = std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == 1; });
      CHECK(std::abs(static_cast<double>(pos) - positives / static_cast<double>(k)) < 1.0 + 1e-9);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    CHECK(all == expect);
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("evaluate_provider", "[evaluation]") {
  const auto gold = testing::gold_labels(49, 51);
  LabelledFixture fx(gold);
  PairLookup lookup(fx.db, fx.queries);

  const auto base = evaluate_provider(ConstantProvider(1.0), fx.pairs, lookup);
  const auto direct = classification_metrics(always(1, gold.size()), gold);
  CHECK(base.avg_precision == direct.avg_precision);
  CHECK(base.weighted_f1 == direct.weighted_f1);
  CHECK(base.threshold == 0.5);

  const auto none = evaluate_provider(ConstantProvider(1.0), fx.pairs, lookup, 1.1);
  CHECK_THAT(none.avg_recall, WithinAbs(0.51, 1e-12));
  CHECK(none.confusion.tp == 0);

  // Score table over the fixture pairs, compared with the metric oracle.
  auto table = std::make_shared<ScoreTable>("fixture");
  std::vector<int> pred;
  std::vector<AnnotatedPair> pairs;
  const std::vector<double> scores{0.83, 0.91, 0.2, 0.5, 0.05, 0.77, 0.49, 0.6};
  const std::vector<int> labels{1, 1, 0, 0, 0, 1, 1, 0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = fx.db.snippets()[i];
    table->insert("q1", s.id, scores[i]);
    pairs.push_back({"q1|" + s.id, "q1", s.id, {"table"}, {}, labels[i]});
    pred.push_back(scores[i] >= 0.5);
  }
  ScoreTableProvider provider(table);
  const auto r = evaluate_provider(provider, pairs, lookup);
  const auto o = oracle::metrics(pred, labels);
  CHECK_THAT(r.avg_precision, WithinAbs(o.wp, 1e-12));
  CHECK_THAT(r.avg_recall, WithinAbs(o.wr, 1e-12));
  CHECK_THAT(r.weighted_f1, WithinAbs(o.wf, 1e-12));

  pairs.push_back({"q2|x", "q2", fx.db.snippets()[9].id, {"table"}, {}, 1});
  CHECK_THROWS_AS(evaluate_provider(provider, pairs, lookup), UnresolvedPairError);
  pairs.back().majority.reset();
  CHECK_THROWS_WITH(evaluate_provider(provider, pairs, lookup), ContainsSubstring("no majority"));
}

TEST_CASE("cross_validate_provider", "[evaluation]") {
  LabelledFixture fx(testing::gold_labels(40, 60));
  PairLookup lookup(fx.db, fx.queries);
  const auto cv = cross_validate_provider(ConstantProvider(1.0), fx.pairs, lookup, 0.5, 10, 3);
  REQUIRE(cv.folds.size() == 10);
  // Stratification gives every fold 4 positives out of 10, so each fold equals the baseline at p = 0.4.
  for (const auto& f : cv.folds) CHECK_THAT(f.avg_precision, WithinAbs(0.16, 1e-12));
  CHECK_THAT(cv.mean.avg_precision, WithinAbs(0.16, 1e-12));
  CHECK(cv.mean.confusion.total() == 100);

  const auto text = format_metrics_table({{"Always-relevant", cv.mean}});
  CHECK_THAT(text, ContainsSubstring("Model"));
  CHECK_THAT(text, ContainsSubstring("0.160"));
  CHECK(to_json(cv.mean)["confusion"]["fp"] == 60);
}
