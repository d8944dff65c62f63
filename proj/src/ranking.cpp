#include "snipq/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>

namespace snipq {
namespace {

std::string lowercase(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

bool ranks_before(const RankedEntity& a, const RankedEntity& b) {
  if (a.item_score != b.item_score) return a.item_score > b.item_score;
  return a.entity_id < b.entity_id;
}

std::vector<RankedEntity> select_top(std::vector<RankedEntity> ranked, std::size_t n) {
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

void require_nonempty(const EntitySubset& entities) {
  if (entities.empty()) throw EmptyResultError("no entities to rank");
}

// Records the exception thrown for the lowest index so parallel loops report the
// same failure as the serial order would.
class FirstError {
 public:
  void record(std::int64_t index, std::exception_ptr e) {
#pragma omp critical(snipq_first_error)
    {
      if (!error_ || index < index_) {
        index_ = index;
        error_ = std::move(e);
      }
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::int64_t index_ = 0;
  std::exception_ptr error_;
};

}  // namespace

void RankingParams::validate() const {
  if (top_snippets < 1) throw DataError("J (top snippets) must be >= 1");
  if (top_entities < 1) throw DataError("N (top entities) must be >= 1");
}

EntitySubset::EntitySubset(const EntityDatabase& db) : db_(&db), indices_(db.size()) {
  std::iota(indices_.begin(), indices_.end(), std::size_t{0});
}

EntitySubset::EntitySubset(const EntityDatabase& db, std::vector<std::size_t> indices)
    : db_(&db), indices_(std::move(indices)) {
  for (auto i : indices_) {
    if (i >= db.size()) throw DataError("entity index out of range in subset");
  }
}

std::vector<std::string> EntitySubset::entity_ids() const {
  std::vector<std::string> ids;
  for (auto i : indices_) ids.push_back(db_->entities()[i].id);
  return ids;
}

RankedEntity aggregate_entity(const std::string& entity_id, std::span<const Snippet> snippets,
                              std::span<const double> scores, const RankingParams& params) {
  std::vector<std::size_t> order(snippets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw DataError("non-finite score for snippet '" + snippets[i].id + "'");
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return snippets[a].id < snippets[b].id;
  });

  RankedEntity out;
  out.entity_id = entity_id;
  const auto keep = std::min(params.top_snippets, snippets.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < keep; ++k) {
    out.top_snippets.push_back({snippets[order[k]].id, scores[order[k]]});
    sum += scores[order[k]];
  }
  const auto denom = params.averaging == Averaging::kStrict ? params.top_snippets : keep;
  out.item_score = denom == 0 ? 0.0 : sum / static_cast<double>(denom);
  return out;
}

std::vector<RankedEntity> rank_and_select_serial(const ScoreProvider& provider, const Query& query,
                                                 const EntitySubset& entities, const RankingParams& params) {
  params.validate();
  require_nonempty(entities);
  const auto bound = provider.bind(query);
  const auto& db = entities.database();
  std::vector<RankedEntity> ranked;
  for (auto e : entities.indices()) {
    const auto snippets = db.snippets_of(e);
    std::vector<double> scores;
    for (const auto& s : snippets) scores.push_back(bound->score(s));
    ranked.push_back(aggregate_entity(db.entities()[e].id, snippets, scores, params));
  }
  return select_top(std::move(ranked), params.top_entities);
}

std::vector<RankedEntity> rank_and_select(const ScoreProvider& provider, const Query& query,
                                          const EntitySubset& entities, const RankingParams& params) {
  params.validate();
  require_nonempty(entities);
  const auto bound = provider.bind(query);
  const auto& db = entities.database();
  const auto idx = entities.indices();

  // Flatten the candidate snippets so scoring parallelises over snippets, not entities.
  std::vector<const Snippet*> flat;
  std::vector<std::size_t> offsets{0};
  for (auto e : idx) {
    for (const auto& s : db.snippets_of(e)) flat.push_back(&s);
    offsets.push_back(flat.size());
  }
  std::vector<double> scores(flat.size());

  if (bound->concurrent()) {
    FirstError failure;
    const auto n = static_cast<std::int64_t>(flat.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        scores[static_cast<std::size_t>(i)] = bound->score(*flat[static_cast<std::size_t>(i)]);
      } catch (...) {
        failure.record(i, std::current_exception());
      }
    }
    failure.rethrow();
  } else if (!flat.empty()) {
    bound->score_batch(flat, scores);
  }

  std::vector<RankedEntity> ranked(idx.size());
  FirstError failure;
  const auto m = static_cast<std::int64_t>(idx.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t k = 0; k < m; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      const auto snippets = db.snippets_of(idx[i]);
      const std::span<const double> entity_scores(scores.data() + offsets[i], offsets[i + 1] - offsets[i]);
      ranked[i] = aggregate_entity(db.entities()[idx[i]].id, snippets, entity_scores, params);
    } catch (...) {
      failure.record(k, std::current_exception());
    }
  }
  failure.rethrow();
  return select_top(std::move(ranked), params.top_entities);
}

std::vector<RankedEntity> rank_and_select(const ScoreProvider& provider, const Query& query,
                                          const EntityDatabase& db, const RankingParams& params) {
  return rank_and_select(provider, query, EntitySubset(db), params);
}

EntitySubset schema_filter(const EntityDatabase& db, const SlotConstraints& constraints) {
  for (const auto& [key, value] : constraints) {
    if (!is_known_slot(key)) throw DataError("unknown constraint key '" + key + "'");
  }
  std::vector<std::size_t> keep;
  const auto entities = db.entities();
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& e = entities[i];
    bool ok = true;
    for (const auto& [key, raw] : constraints) {
      const auto want = lowercase(raw);
      if (key == "area") {
        ok = e.location && to_string(*e.location) == want;
      } else if (key == "price_range") {
        ok = e.price_range && to_string(*e.price_range) == want;
      } else {
        ok = std::any_of(e.cuisines.begin(), e.cuisines.end(),
                         [&](const std::string& c) { return lowercase(c) == want; });
      }
      if (!ok) break;
    }
    if (ok) keep.push_back(i);
  }
  return EntitySubset(db, std::move(keep));
}

std::vector<RankedEntity> rank_hybrid(const ScoreProvider& provider, const Query& query, const EntityDatabase& db,
                                      const RankingParams& params) {
  const auto subset = schema_filter(db, query.slot_constraints.value_or(SlotConstraints{}));
  if (subset.empty()) throw EmptyResultError("no entity matches constraints");
  return rank_and_select(provider, query, subset, params);
}

nlohmann::json to_json(std::span<const RankedEntity> ranking) {
  auto out = nlohmann::json::array();
  for (const auto& r : ranking) {
    auto snippets = nlohmann::json::array();
    for (const auto& s : r.top_snippets) snippets.push_back({{"snippet_id", s.snippet_id}, {"score", s.score}});
    out.push_back({{"entity_id", r.entity_id}, {"item_score", r.item_score}, {"top_snippets", std::move(snippets)}});
  }
  return out;
}

}  // namespace snipq
