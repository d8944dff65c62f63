#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "snipq/corpus.hpp"
#include "snipq/scoring.hpp"

namespace snipq {

/// How an entity with fewer than J snippets is averaged.
enum class Averaging {
  kAvailable,  ///< mean over the snippets that exist
  kStrict,     ///< sum of the top snippets divided by J, missing ones count as zero
};

struct RankingParams {
  std::size_t top_snippets = 5;  ///< J
  std::size_t top_entities = 5;  ///< N
  Averaging averaging = Averaging::kAvailable;

  /// Throws DataError unless J >= 1 and N >= 1.
  void validate() const;
};

struct ScoredSnippet {
  std::string snippet_id;
  double score = 0.0;

  bool operator==(const ScoredSnippet&) const = default;
};

/// An entity with its item score and the snippets that produced it, best first.
/// In kAvailable mode item_score is the mean of top_snippets' scores.
struct RankedEntity {
  std::string entity_id;
  double item_score = 0.0;
  std::vector<ScoredSnippet> top_snippets;

  bool operator==(const RankedEntity&) const = default;
};

/// A subset of a database's entities, in database order.
class EntitySubset {
 public:
  explicit EntitySubset(const EntityDatabase& db);
  EntitySubset(const EntityDatabase& db, std::vector<std::size_t> indices);

  const EntityDatabase& database() const noexcept { return *db_; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::vector<std::string> entity_ids() const;

 private:
  const EntityDatabase* db_;
  std::vector<std::size_t> indices_;
};

/// Sorts one entity's scored snippets (score descending, then snippet id ascending),
/// keeps the top J, and computes the item score by summing them in that order.
RankedEntity aggregate_entity(const std::string& entity_id, std::span<const Snippet> snippets,
                              std::span<const double> scores, const RankingParams& params);

/// Scores every snippet of every entity, ranks entities by item score (descending,
/// ties by ascending entity id) and returns the first N. Snippet scoring and per-entity
/// aggregation run on OpenMP threads when the provider allows concurrent calls; the
/// result is identical to rank_and_select_serial.
std::vector<RankedEntity> rank_and_select(const ScoreProvider& provider, const Query& query,
                                          const EntitySubset& entities, const RankingParams& params);
std::vector<RankedEntity> rank_and_select(const ScoreProvider& provider, const Query& query,
                                          const EntityDatabase& db, const RankingParams& params);

/// Single-threaded reference: one provider call per snippet, entity by entity.
std::vector<RankedEntity> rank_and_select_serial(const ScoreProvider& provider, const Query& query,
                                                 const EntitySubset& entities, const RankingParams& params);

/// Keeps entities matching every constraint: area == location, price_range exact,
/// cuisine in cuisines. Case-insensitive; entities lacking the field never match.
/// Throws DataError for keys other than area, cuisine, price_range.
EntitySubset schema_filter(const EntityDatabase& db, const SlotConstraints& constraints);

/// rank_and_select over schema_filter(db, query.slot_constraints). Throws
/// EmptyResultError("no entity matches constraints") when the filter keeps nothing.
std::vector<RankedEntity> rank_hybrid(const ScoreProvider& provider, const Query& query, const EntityDatabase& db,
                                      const RankingParams& params);

nlohmann::json to_json(std::span<const RankedEntity> ranking);

}  // namespace snipq
