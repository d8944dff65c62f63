#include "snipq/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "snipq/csv.hpp"
#include "snipq/error.hpp"
#include "snipq/random.hpp"

namespace snipq {

std::string make_pair_id(const std::string& query_id, const std::string& snippet_id) {
  return query_id + "|" + snippet_id;
}

std::vector<AnnotatedPair> sample_annotation_pairs(std::span<const RankedEntity> ranked, const std::string& method,
                                                   const Query& query, std::uint64_t seed, std::size_t k_entities,
                                                   std::size_t k_snippets) {
  if (ranked.empty()) throw EmptyResultError("cannot sample from an empty ranking for query '" + query.id + "'");
  if (k_entities == 0 || k_snippets == 0) throw DataError("k_entities and k_snippets must be >= 1");
  Rng rng(seed);
  const auto pool = std::min(k_entities, ranked.size());
  const auto& chosen = ranked[static_cast<std::size_t>(rng.below(pool))];

  std::vector<AnnotatedPair> out;
  const auto n = std::min(k_snippets, chosen.top_snippets.size());
  for (std::size_t i = 0; i < n; ++i) {
    AnnotatedPair p;
    p.query_id = query.id;
    p.snippet_id = chosen.top_snippets[i].snippet_id;
    p.pair_id = make_pair_id(p.query_id, p.snippet_id);
    p.source_methods = {method};
    out.push_back(std::move(p));
  }
  return out;
}

MergedPairs merge_pairs(std::vector<AnnotatedPair> pairs) {
  MergedPairs merged;
  std::unordered_map<std::string, std::size_t> index;
  for (auto& p : pairs) {
    auto [it, fresh] = index.emplace(p.pair_id, merged.pairs.size());
    if (fresh) {
      merged.pairs.push_back(std::move(p));
      continue;
    }
    auto& kept = merged.pairs[it->second];
    if (std::find(merged.collisions.begin(), merged.collisions.end(), p.pair_id) == merged.collisions.end()) {
      merged.collisions.push_back(p.pair_id);
    }
    for (auto& m : p.source_methods) {
      if (std::find(kept.source_methods.begin(), kept.source_methods.end(), m) == kept.source_methods.end()) {
        kept.source_methods.push_back(std::move(m));
      }
    }
  }
  return merged;
}

int majority_vote(std::span<const int> labels) {
  if (labels.size() < 3 || labels.size() % 2 == 0) {
    throw DataError("majority vote needs an odd number (>= 3) of labels, got " + std::to_string(labels.size()));
  }
  std::size_t ones = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
    ones += static_cast<std::size_t>(l);
  }
  return 2 * ones > labels.size() ? 1 : 0;
}

int majority_vote(const std::map<std::string, int>& labels) {
  std::vector<int> values;
  for (const auto& [annotator, l] : labels) values.push_back(l);
  return majority_vote(values);
}

std::vector<HitSpec> build_hits(std::span<const std::string> pair_ids, std::span<const std::string> gold_pool,
                                std::uint64_t seed, const HitConfig& config) {
  if (config.gold_count >= config.hit_size) throw DataError("HIT size must exceed the gold pair count");
  if (gold_pool.size() < config.gold_count) {
    throw DataError("gold pool has " + std::to_string(gold_pool.size()) + " pairs, need " +
                    std::to_string(config.gold_count) + " per HIT");
  }
  Rng rng(seed);
  std::vector<std::string> order(pair_ids.begin(), pair_ids.end());
  rng.shuffle(std::span<std::string>(order));

  const auto per_hit = config.hit_size - config.gold_count;
  std::vector<HitSpec> hits;
  for (std::size_t begin = 0; begin < order.size(); begin += per_hit) {
    HitSpec hit;
    hit.hit_id = "hit" + std::to_string(hits.size());
    const auto end = std::min(order.size(), begin + per_hit);
    hit.pair_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                        order.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::string> gold(gold_pool.begin(), gold_pool.end());
    // Partial Fisher-Yates: the first gold_count slots become a uniform sample.
    for (std::size_t i = 0; i < config.gold_count; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(gold.size() - i));
      std::swap(gold[i], gold[j]);
      hit.gold_pairs.push_back(gold[i]);
      hit.pair_ids.push_back(gold[i]);
    }
    rng.shuffle(std::span<std::string>(hit.pair_ids));
    hits.push_back(std::move(hit));
  }
  return hits;
}

bool quality_check(const HitSpec& hit, const std::map<std::string, int>& submitted,
                   const std::map<std::string, int>& gold, std::size_t min_correct) {
  std::size_t correct = 0;
  for (const auto& id : hit.gold_pairs) {
    auto answer = submitted.find(id);
    if (answer == submitted.end()) throw DataError("submission for " + hit.hit_id + " lacks gold pair '" + id + "'");
    auto truth = gold.find(id);
    if (truth == gold.end()) throw DataError("no known label for gold pair '" + id + "'");
    if (answer->second == truth->second) ++correct;
  }
  return correct >= min_correct;
}

double fleiss_kappa(const std::vector<std::vector<int>>& counts, int raters) {
  if (raters < 2) throw DataError("Fleiss kappa needs at least 2 raters per item");
  if (counts.empty()) throw DataError("Fleiss kappa needs at least one item");
  const auto categories = counts.front().size();
  if (categories == 0) throw DataError("Fleiss kappa needs at least one category");
  const double n = raters;
  std::vector<double> totals(categories, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& row = counts[i];
    if (row.size() != categories) throw DataError("ragged rating matrix at item " + std::to_string(i));
    long sum = 0;
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      if (row[j] < 0) throw DataError("negative count at item " + std::to_string(i));
      sum += row[j];
      agree += static_cast<double>(row[j]) * (row[j] - 1);
      totals[j] += row[j];
    }
    if (sum != raters) {
      throw DataError("item " + std::to_string(i) + " has " + std::to_string(sum) + " ratings, expected " +
                      std::to_string(raters));
    }
    p_bar += agree / (n * (n - 1.0));
  }
  const double items = static_cast<double>(counts.size());
  p_bar /= items;
  double p_e = 0.0;
  for (double t : totals) {
    const double p = t / (items * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) throw DataError("degenerate: chance agreement is 1");
  return (p_bar - p_e) / (1.0 - p_e);
}

double annotator_vs_majority_kappa(std::span<const AnnotatedPair> pairs, const std::string& annotator_id) {
  std::vector<std::vector<int>> counts;
  for (const auto& p : pairs) {
    auto it = p.labels.find(annotator_id);
    if (it == p.labels.end() || !p.majority) continue;
    std::vector<int> row(2, 0);
    ++row.at(static_cast<std::size_t>(it->second));
    ++row.at(static_cast<std::size_t>(*p.majority));
    counts.push_back(std::move(row));
  }
  if (counts.empty()) throw DataError("annotator '" + annotator_id + "' labelled no pair with a majority label");
  return fleiss_kappa(counts, 2);
}

std::vector<AnnotatedPair> aggregate_labels(std::span<const LabelRecord> labels,
                                            std::optional<std::span<const AnnotatedPair>> sampled) {
  std::vector<AnnotatedPair> out;
  std::unordered_map<std::string, std::size_t> index;
  if (sampled) {
    for (const auto& p : *sampled) {
      if (!index.emplace(p.pair_id, out.size()).second) throw DataError("duplicate pair id '" + p.pair_id + "'");
      auto copy = p;
      copy.labels.clear();
      copy.majority.reset();
      out.push_back(std::move(copy));
    }
  }
  for (const auto& l : labels) {
    auto it = index.find(l.pair_id);
    if (it == index.end()) {
      if (sampled) throw DataError("label for unknown pair '" + l.pair_id + "'");
      it = index.emplace(l.pair_id, out.size()).first;
      AnnotatedPair p;
      p.pair_id = l.pair_id;
      p.query_id = l.query_id;
      p.snippet_id = l.snippet_id;
      out.push_back(std::move(p));
    }
    auto& p = out[it->second];
    if (p.query_id != l.query_id || p.snippet_id != l.snippet_id) {
      throw DataError("pair '" + l.pair_id + "' has inconsistent query/snippet ids across label rows");
    }
    if (!p.labels.emplace(l.annotator_id, l.label).second) {
      throw DataError("pair '" + l.pair_id + "' labelled twice by annotator '" + l.annotator_id + "'");
    }
  }
  for (auto& p : out) {
    if (p.labels.empty()) continue;
    try {
      p.majority = majority_vote(p.labels);
    } catch (const DataError& e) {
      throw DataError("pair '" + p.pair_id + "': " + e.what());
    }
  }
  return out;
}

std::vector<AnnotatedPair> parse_annotated_pairs(std::istream& in, const std::string& source) {
  std::vector<AnnotatedPair> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(raw);
      AnnotatedPair p;
      p.pair_id = obj.at("pair_id").get<std::string>();
      p.query_id = obj.at("query_id").get<std::string>();
      p.snippet_id = obj.at("snippet_id").get<std::string>();
      p.source_methods = obj.value("source_methods", std::vector<std::string>{});
      p.labels = obj.value("labels", std::map<std::string, int>{});
      for (const auto& [a, l] : p.labels) {
        if (l != 0 && l != 1) throw DataError("label of annotator '" + a + "' must be 0 or 1");
      }
      if (obj.contains("majority") && !obj["majority"].is_null()) {
        const int m = obj["majority"].get<int>();
        if (m != 0 && m != 1) throw DataError("majority must be 0 or 1");
        p.majority = m;
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw LineError(source, line, e.what());
    } catch (const DataError& e) {
      throw LineError(source, line, e.what());
    }
  }
  return out;
}

std::vector<AnnotatedPair> load_annotated_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_annotated_pairs(in, path.string());
}

void write_annotated_pairs(std::ostream& out, std::span<const AnnotatedPair> pairs) {
  for (const auto& p : pairs) {
    nlohmann::json obj = {{"pair_id", p.pair_id},
                          {"query_id", p.query_id},
                          {"snippet_id", p.snippet_id},
                          {"source_methods", p.source_methods},
                          {"labels", p.labels}};
    obj["majority"] = p.majority ? nlohmann::json(*p.majority) : nlohmann::json(nullptr);
    out << obj.dump() << '\n';
  }
}

void write_hits_csv(std::ostream& out, std::span<const HitSpec> hits, const PairTextLookup& text_of) {
  csv::write_row(out, {"pair_id", "query_text", "snippet_text"});
  for (const auto& hit : hits) {
    for (const auto& id : hit.pair_ids) {
      auto [query_text, snippet_text] = text_of(id);
      csv::write_row(out, {id, query_text, snippet_text});
    }
  }
}

void write_hits_manifest(std::ostream& out, std::span<const HitSpec> hits) {
  for (const auto& hit : hits) {
    nlohmann::json obj = {{"hit_id", hit.hit_id}, {"pair_ids", hit.pair_ids}, {"gold_pairs", hit.gold_pairs}};
    out << obj.dump() << '\n';
  }
}

}  // namespace snipq
