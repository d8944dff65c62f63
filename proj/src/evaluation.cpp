#include "snipq/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "snipq/error.hpp"
#include "snipq/random.hpp"

namespace snipq {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t predicted, std::size_t support) {
  ClassMetrics m;
  m.precision = ratio(tp, predicted);
  m.recall = ratio(tp, support);
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.support = support;
  return m;
}

void finish(RetrievalSummary& s) {
  s.snippet_relevance_pct = 100.0 * ratio(s.relevant, s.pairs);
  s.pct_at_least_one = 100.0 * ratio(s.queries_with_relevant, s.queries);
  s.avg_relevant = ratio(s.relevant, s.queries);
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out << (c ? " | " : "") << (c + 1 == cells.size() ? cells[c] : pad(cells[c], width[c]));
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 3 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

}  // namespace

ConfusionMatrix ConfusionMatrix::from(std::span<const int> predictions, std::span<const int> golds) {
  if (predictions.size() != golds.size()) {
    throw DataError("prediction/gold length mismatch (" + std::to_string(predictions.size()) + " vs " +
                    std::to_string(golds.size()) + ")");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const int p = predictions[i];
    const int g = golds[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) throw DataError("labels must be 0 or 1");
    if (p == 1 && g == 1) ++cm.tp;
    else if (p == 1) ++cm.fp;
    else if (g == 1) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw DataError("cannot compute metrics over zero pairs");
  MetricsReport r;
  r.confusion = cm;
  r.per_class[1] = class_metrics(cm.tp, cm.tp + cm.fp, cm.tp + cm.fn);
  r.per_class[0] = class_metrics(cm.tn, cm.tn + cm.fn, cm.tn + cm.fp);
  for (const auto& c : r.per_class) {
    const double w = ratio(c.support, n);
    r.avg_precision += w * c.precision;
    r.avg_recall += w * c.recall;
    r.weighted_f1 += w * c.f1;
  }
  return r;
}

MetricsReport classification_metrics(std::span<const int> predictions, std::span<const int> golds) {
  if (golds.empty() && predictions.empty()) throw DataError("cannot compute metrics over zero pairs");
  return metrics_from_confusion(ConfusionMatrix::from(predictions, golds));
}

RetrievalReport retrieval_metrics(std::span<const QueryJudgements> judgements, std::size_t k) {
  if (judgements.empty()) throw DataError("retrieval metrics need at least one query");
  RetrievalReport report;
  for (const auto& q : judgements) {
    if (q.labels.size() > k) {
      throw DataError("query '" + q.query_id + "' has " + std::to_string(q.labels.size()) + " labels, at most " +
                      std::to_string(k) + " allowed");
    }
    std::size_t rel = 0;
    for (int l : q.labels) {
      if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
      rel += static_cast<std::size_t>(l);
    }
    for (auto* s : {&report.overall, &report.by_category[q.category]}) {
      ++s->queries;
      s->pairs += q.labels.size();
      s->relevant += rel;
      if (rel > 0) ++s->queries_with_relevant;
    }
  }
  finish(report.overall);
  for (auto& [cat, s] : report.by_category) finish(s);
  return report;
}

std::vector<QueryJudgements> judgements_for_method(std::span<const AnnotatedPair> pairs,
                                                   std::span<const Query> queries, const std::string& method) {
  std::unordered_map<std::string, std::vector<int>> by_query;
  for (const auto& p : pairs) {
    if (!p.majority) continue;
    if (std::find(p.source_methods.begin(), p.source_methods.end(), method) == p.source_methods.end()) continue;
    by_query[p.query_id].push_back(*p.majority);
  }
  std::vector<QueryJudgements> out;
  for (const auto& q : queries) {
    auto it = by_query.find(q.id);
    if (it == by_query.end()) continue;
    out.push_back({q.id, q.category, std::move(it->second)});
    by_query.erase(it);
  }
  if (!by_query.empty()) throw DataError("annotated pairs reference unknown query '" + by_query.begin()->first + "'");
  return out;
}

std::vector<std::vector<std::size_t>> kfold_splits(std::span<const int> labels, std::size_t k, std::uint64_t seed,
                                                   bool stratify) {
  if (k < 2) throw DataError("k-fold needs k >= 2");
  if (k > labels.size()) {
    throw DataError("k = " + std::to_string(k) + " exceeds the number of pairs (" + std::to_string(labels.size()) + ")");
  }
  Rng rng(seed);
  std::vector<std::size_t> deal;
  if (stratify) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));
    deal = std::move(pos);
    deal.insert(deal.end(), neg.begin(), neg.end());
  } else {
    deal.resize(labels.size());
    for (std::size_t i = 0; i < deal.size(); ++i) deal[i] = i;
    rng.shuffle(std::span<std::size_t>(deal));
  }
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < deal.size(); ++i) folds[i % k].push_back(deal[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

PairLookup::PairLookup(const EntityDatabase& db, std::span<const Query> queries) : db_(&db) {
  for (const auto& q : queries) queries_.emplace(q.id, &q);
}

const Query& PairLookup::query(const std::string& query_id) const {
  auto it = queries_.find(query_id);
  if (it == queries_.end()) throw DataError("unknown query '" + query_id + "'");
  return *it->second;
}

const Snippet& PairLookup::snippet(const std::string& snippet_id) const {
  const auto* s = db_->find_snippet(snippet_id);
  if (!s) throw DataError("unknown snippet '" + snippet_id + "'");
  return *s;
}

MetricsReport evaluate_provider(const ScoreProvider& provider, std::span<const AnnotatedPair> pairs,
                                const PairLookup& lookup, double threshold) {
  std::vector<int> predictions, golds;
  // Bind once per query; pairs of one query are usually contiguous.
  std::unique_ptr<BoundQuery> bound;
  std::string bound_query;
  for (const auto& p : pairs) {
    if (!p.majority) throw DataError("pair '" + p.pair_id + "' has no majority label");
    if (!bound || bound_query != p.query_id) {
      bound = provider.bind(lookup.query(p.query_id));
      bound_query = p.query_id;
    }
    predictions.push_back(classify(bound->score(lookup.snippet(p.snippet_id)), threshold));
    golds.push_back(*p.majority);
  }
  auto report = classification_metrics(predictions, golds);
  report.threshold = threshold;
  return report;
}

CrossValidationReport cross_validate_provider(const ScoreProvider& provider, std::span<const AnnotatedPair> pairs,
                                              const PairLookup& lookup, double threshold, std::size_t k,
                                              std::uint64_t seed, bool stratify) {
  std::vector<int> labels;
  for (const auto& p : pairs) {
    if (!p.majority) throw DataError("pair '" + p.pair_id + "' has no majority label");
    labels.push_back(*p.majority);
  }
  CrossValidationReport cv;
  for (const auto& fold : kfold_splits(labels, k, seed, stratify)) {
    std::vector<AnnotatedPair> held_out;
    for (auto i : fold) held_out.push_back(pairs[i]);
    cv.folds.push_back(evaluate_provider(provider, held_out, lookup, threshold));
  }
  const double n = static_cast<double>(cv.folds.size());
  for (const auto& f : cv.folds) {
    cv.mean.avg_precision += f.avg_precision / n;
    cv.mean.avg_recall += f.avg_recall / n;
    cv.mean.weighted_f1 += f.weighted_f1 / n;
    for (std::size_t c = 0; c < 2; ++c) {
      cv.mean.per_class[c].precision += f.per_class[c].precision / n;
      cv.mean.per_class[c].recall += f.per_class[c].recall / n;
      cv.mean.per_class[c].f1 += f.per_class[c].f1 / n;
      cv.mean.per_class[c].support += f.per_class[c].support;
    }
    cv.mean.confusion.tp += f.confusion.tp;
    cv.mean.confusion.fp += f.confusion.fp;
    cv.mean.confusion.tn += f.confusion.tn;
    cv.mean.confusion.fn += f.confusion.fn;
  }
  cv.mean.threshold = threshold;
  return cv;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["avg_precision"] = r.avg_precision;
  j["avg_recall"] = r.avg_recall;
  j["weighted_f1"] = r.weighted_f1;
  j["threshold"] = r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
  auto& per = j["per_class"] = nlohmann::json::object();
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& m = r.per_class[c];
    per[std::to_string(c)] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  return j;
}

nlohmann::json to_json(const RetrievalReport& r) {
  auto summary = [](const RetrievalSummary& s) {
    return nlohmann::json{{"queries", s.queries},
                          {"pairs", s.pairs},
                          {"relevant", s.relevant},
                          {"snippet_relevance_pct", s.snippet_relevance_pct},
                          {"pct_at_least_one", s.pct_at_least_one},
                          {"avg_relevant", s.avg_relevant}};
  };
  nlohmann::json j;
  j["overall"] = summary(r.overall);
  auto& cats = j["by_category"] = nlohmann::json::object();
  for (const auto& [cat, s] : r.by_category) cats[std::string(to_string(cat))] = summary(s);
  return j;
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, r] : rows) {
    cells.push_back({name, fixed(r.avg_precision, 3), fixed(r.avg_recall, 3), fixed(r.weighted_f1, 3)});
  }
  return table({"Model", "Avg Precision", "Avg Recall", "Weighted F1"}, cells);
}

std::string format_retrieval_table(const std::vector<std::pair<std::string, RetrievalReport>>& rows) {
  const QueryCategory cats[] = {QueryCategory::kMenuItem, QueryCategory::kObjective, QueryCategory::kSubjective};
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, r] : rows) {
    std::vector<std::string> row{name, fixed(r.overall.snippet_relevance_pct, 1) + "%"};
    for (auto c : cats) {
      auto it = r.by_category.find(c);
      row.push_back(it == r.by_category.end() ? "-" : fixed(it->second.snippet_relevance_pct, 1) + "%");
    }
    row.push_back(fixed(r.overall.pct_at_least_one, 1) + "%");
    row.push_back(fixed(r.overall.avg_relevant, 2));
    cells.push_back(std::move(row));
  }
  return table({"Model", "Relevant", "Menu item", "Objective", "Subjective", ">=1 relevant", "Avg relevant"}, cells);
}

}  // namespace snipq
