#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "snipq/annotation.hpp"
#include "snipq/corpus.hpp"
#include "snipq/scoring.hpp"

namespace snipq {

inline constexpr double kDefaultThreshold = 0.5;

/// 1 iff score >= threshold.
inline int classify(double score, double threshold) { return score >= threshold ? 1 : 0; }

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;

  static ConfusionMatrix from(std::span<const int> predictions, std::span<const int> golds);
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Per-class precision/recall/F1 for labels {0, 1} and their support-weighted averages.
/// A class that receives no predictions has precision 0; F1 is 0 when P + R = 0.
struct MetricsReport {
  double avg_precision = 0.0;
  double avg_recall = 0.0;
  double weighted_f1 = 0.0;
  std::array<ClassMetrics, 2> per_class{};
  ConfusionMatrix confusion;
  std::optional<double> threshold;
};

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

/// Throws DataError on length mismatch, empty input, or non-binary values.
MetricsReport classification_metrics(std::span<const int> predictions, std::span<const int> golds);

/// Top-k labels of one query's retrieved snippets.
struct QueryJudgements {
  std::string query_id;
  QueryCategory category = QueryCategory::kUncategorized;
  std::vector<int> labels;
};

struct RetrievalSummary {
  std::size_t queries = 0;
  std::size_t pairs = 0;
  std::size_t relevant = 0;
  std::size_t queries_with_relevant = 0;
  double snippet_relevance_pct = 0.0;  ///< 100 * relevant / pairs
  double pct_at_least_one = 0.0;       ///< 100 * queries with a relevant snippet / queries
  double avg_relevant = 0.0;           ///< relevant / queries
};

struct RetrievalReport {
  RetrievalSummary overall;
  std::map<QueryCategory, RetrievalSummary> by_category;
};

/// Throws DataError for empty input or a query with more than `k` labels.
RetrievalReport retrieval_metrics(std::span<const QueryJudgements> judgements, std::size_t k = 5);

/// Groups the majority-labelled pairs of one source method by query, in query file order.
std::vector<QueryJudgements> judgements_for_method(std::span<const AnnotatedPair> pairs,
                                                   std::span<const Query> queries, const std::string& method);

/// Splits indices 0..labels.size()-1 into k disjoint folds whose sizes differ by at most
/// one. With `stratify`, positives and negatives are shuffled separately and dealt
/// round-robin, so every fold's positive count is within one of proportional. Folds are
/// returned with ascending indices.
std::vector<std::vector<std::size_t>> kfold_splits(std::span<const int> labels, std::size_t k, std::uint64_t seed,
                                                   bool stratify = true);

/// Resolves pair ids to their query and snippet.
class PairLookup {
 public:
  PairLookup(const EntityDatabase& db, std::span<const Query> queries);

  const Query& query(const std::string& query_id) const;
  const Snippet& snippet(const std::string& snippet_id) const;

 private:
  const EntityDatabase* db_;
  std::unordered_map<std::string, const Query*> queries_;
};

/// Classifies each pair's score at `threshold` and compares with its majority label.
MetricsReport evaluate_provider(const ScoreProvider& provider, std::span<const AnnotatedPair> pairs,
                                const PairLookup& lookup, double threshold = kDefaultThreshold);

struct CrossValidationReport {
  std::vector<MetricsReport> folds;
  MetricsReport mean;  ///< unweighted mean of fold metrics
};

/// Per-fold evaluation of an offline-trained provider over stratified folds.
CrossValidationReport cross_validate_provider(const ScoreProvider& provider, std::span<const AnnotatedPair> pairs,
                                              const PairLookup& lookup, double threshold, std::size_t k,
                                              std::uint64_t seed, bool stratify = true);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const RetrievalReport& report);

/// Aligned text tables: precision/recall/F1 to three decimals, percentages to one.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string format_retrieval_table(const std::vector<std::pair<std::string, RetrievalReport>>& rows);

}  // namespace snipq
