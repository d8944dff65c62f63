#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "snipq/corpus.hpp"

namespace snipq {

/// Lowercases ASCII letters and splits on maximal runs of ASCII characters that are
/// not letters or digits. Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
/// No stemming, no stopword removal; duplicates are preserved.
std::vector<std::string> tokenize(std::string_view text);

/// Sparse vector with strictly increasing column ids and strictly positive weights.
class SparseVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  SparseVector() = default;
  /// Sorts by column, merges duplicates by summing, and drops non-positive weights.
  static SparseVector from_unsorted(std::vector<Entry> entries);

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double norm() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

double dot(const SparseVector& a, const SparseVector& b);
/// Cosine similarity; 0 when either vector is zero.
double cosine(const SparseVector& a, const SparseVector& b);

inline constexpr std::string_view kTfIdfMagic = "SNIPQ-TFIDF-1";

/// TF-IDF index over snippets. One snippet is one document;
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1 and weight = raw term count * idf(t).
/// Immutable after construction and safe for concurrent scoring.
class TfIdfIndex {
 public:
  TfIdfIndex() = default;

  /// Throws DataError if `snippets` is empty or every snippet tokenizes to nothing.
  static TfIdfIndex build(std::span<const Snippet> snippets);

  SparseVector vectorize(std::string_view text) const;

  /// Cosine between `query_text` and a stored snippet; throws DataError for unknown ids.
  double score(std::string_view query_text, std::string_view snippet_id) const;
  double score(const SparseVector& query, std::size_t row) const;

  /// Scores a prepared query against every stored snippet, in row order.
  /// `score_all` splits rows across OpenMP threads; `score_all_serial` is the reference loop.
  std::vector<double> score_all(const SparseVector& query) const;
  std::vector<double> score_all_serial(const SparseVector& query) const;

  std::size_t doc_count() const noexcept { return doc_count_; }
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }
  std::span<const std::string> terms() const noexcept { return terms_; }
  std::span<const double> idf() const noexcept { return idf_; }
  /// Column id of a token, or -1 when out of vocabulary.
  std::int64_t column(std::string_view token) const;
  double idf(std::string_view token) const;

  std::span<const std::string> snippet_ids() const noexcept { return snippet_ids_; }
  std::optional<std::size_t> row(std::string_view snippet_id) const;
  const SparseVector& vector(std::size_t row) const { return vectors_.at(row); }

  /// Persistence: first line is the magic string, the rest a JSON document holding
  /// vocabulary, idf, and snippet vectors.
  void save(std::ostream& out) const;
  static TfIdfIndex load(std::istream& in, const std::string& source);
  void save(const std::filesystem::path& path) const;
  static TfIdfIndex load(const std::filesystem::path& path);

  bool operator==(const TfIdfIndex& o) const {
    return doc_count_ == o.doc_count_ && terms_ == o.terms_ && idf_ == o.idf_ &&
           snippet_ids_ == o.snippet_ids_ && vectors_ == o.vectors_;
  }

 private:
  void rebuild_lookups();

  std::size_t doc_count_ = 0;
  std::vector<std::string> terms_;  // column id -> token, lexicographic
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<std::string> snippet_ids_;
  std::vector<SparseVector> vectors_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> row_by_id_;
};

/// Convenience wrapper for one query/snippet pair.
double tfidf_score(const TfIdfIndex& index, std::string_view query_text, std::string_view snippet_id);

}  // namespace snipq
