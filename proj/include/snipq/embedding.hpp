#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace snipq {

/// dot(u, v) / (|u| |v|), or 0 when either norm is 0. Throws DataError on dimension
/// mismatch or non-finite input.
double cosine(std::span<const double> u, std::span<const double> v);

/// Dense sentence embeddings keyed by snippet id or query id. All vectors share one
/// dimension and contain only finite components. Immutable after loading.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension = 0) : dimension_(dimension) {}

  /// Adds a vector; the first insert fixes the dimension when it is still 0.
  /// Throws DataError on duplicate key, dimension mismatch, or non-finite component.
  void insert(std::string key, std::vector<double> vector);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool contains(std::string_view key) const;
  /// Throws DataError naming the key when absent.
  std::span<const double> at(std::string_view key) const;
  /// Keys in insertion order.
  std::span<const std::string> keys() const noexcept { return keys_; }

 private:
  std::size_t dimension_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// JSON-Lines file of {"key": string, "vector": [real, ...]}.
EmbeddingStore load_embeddings(const std::filesystem::path& path);
EmbeddingStore parse_embeddings(std::istream& in, const std::string& source);
void write_embeddings(std::ostream& out, const EmbeddingStore& store);

/// Cosine of the stored query and snippet vectors. Errors name the missing key.
double embedding_score(const EmbeddingStore& store, std::string_view query_key, std::string_view snippet_key);

}  // namespace snipq
