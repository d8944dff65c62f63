#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snipq/corpus.hpp"
#include "snipq/ranking.hpp"

namespace snipq {

/// A query-snippet pair sent for crowd labelling. `source_methods` lists every scorer
/// that selected the pair (more than one when methods collide).
struct AnnotatedPair {
  std::string pair_id;
  std::string query_id;
  std::string snippet_id;
  std::vector<std::string> source_methods;
  std::map<std::string, int> labels;  // annotator id -> 0/1
  std::optional<int> majority;

  bool operator==(const AnnotatedPair&) const = default;
};

/// "<query_id>|<snippet_id>": one id per distinct pair regardless of method.
std::string make_pair_id(const std::string& query_id, const std::string& snippet_id);

/// Draws one entity uniformly among the top min(k_entities, |ranked|) and emits its top
/// min(k_snippets, available) snippets as unlabeled pairs tagged with `method`.
/// Throws EmptyResultError for an empty ranking.
std::vector<AnnotatedPair> sample_annotation_pairs(std::span<const RankedEntity> ranked, const std::string& method,
                                                   const Query& query, std::uint64_t seed,
                                                   std::size_t k_entities = 5, std::size_t k_snippets = 5);

struct MergedPairs {
  std::vector<AnnotatedPair> pairs;
  /// Pair ids selected by more than one sampling call, in first-seen order.
  std::vector<std::string> collisions;
};

/// Deduplicates by pair id, keeping first-seen order and the union of source methods.
MergedPairs merge_pairs(std::vector<AnnotatedPair> pairs);

/// The label held by more than half the annotators. Throws DataError unless the count
/// is odd and at least 3, or if a label is not 0/1.
int majority_vote(std::span<const int> labels);
int majority_vote(const std::map<std::string, int>& labels);

struct HitConfig {
  std::size_t hit_size = 23;
  std::size_t gold_count = 3;
};

/// One crowd task: `pair_ids` in presentation order, with `gold_pairs` mixed in.
struct HitSpec {
  std::string hit_id;
  std::vector<std::string> pair_ids;
  std::vector<std::string> gold_pairs;

  bool operator==(const HitSpec&) const = default;
};

/// Shuffles `pair_ids` and cuts them into HITs of hit_size - gold_count pairs, adds
/// gold_count distinct gold pairs to each and shuffles every HIT. The last HIT may be
/// shorter. Throws DataError if the gold pool is smaller than gold_count.
std::vector<HitSpec> build_hits(std::span<const std::string> pair_ids, std::span<const std::string> gold_pool,
                                std::uint64_t seed, const HitConfig& config = {});

/// True iff the worker answered at least `min_correct` of the HIT's gold pairs correctly.
/// Throws DataError if a gold pair is missing from the submission or from `gold`.
bool quality_check(const HitSpec& hit, const std::map<std::string, int>& submitted,
                   const std::map<std::string, int>& gold, std::size_t min_correct = 3);

/// Fleiss' kappa for an items x categories count matrix with `raters` ratings per item.
/// Throws DataError on malformed input and "degenerate: chance agreement is 1" when all
/// ratings fall in one category.
double fleiss_kappa(const std::vector<std::vector<int>>& counts, int raters);

/// Kappa between one annotator and the majority label, treating them as two raters over
/// the pairs where both exist.
double annotator_vs_majority_kappa(std::span<const AnnotatedPair> pairs, const std::string& annotator_id);

/// Groups label rows by pair id and applies majority_vote. When `sampled` is given its
/// pairs (and source methods) define the output order; labels for unknown pairs are an
/// error. Otherwise pairs appear in first-seen label order.
std::vector<AnnotatedPair> aggregate_labels(std::span<const LabelRecord> labels,
                                            std::optional<std::span<const AnnotatedPair>> sampled = std::nullopt);

std::vector<AnnotatedPair> load_annotated_pairs(const std::filesystem::path& path);
std::vector<AnnotatedPair> parse_annotated_pairs(std::istream& in, const std::string& source);
void write_annotated_pairs(std::ostream& out, std::span<const AnnotatedPair> pairs);

using PairTextLookup = std::function<std::pair<std::string, std::string>(const std::string& pair_id)>;

/// CSV `pair_id,query_text,snippet_text`, HITs written back to back in presentation order.
void write_hits_csv(std::ostream& out, std::span<const HitSpec> hits, const PairTextLookup& text_of);
/// JSON-Lines {"hit_id","pair_ids","gold_pairs"}.
void write_hits_manifest(std::ostream& out, std::span<const HitSpec> hits);

}  // namespace snipq
