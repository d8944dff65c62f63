#include "snipq/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "snipq/corpus.hpp"
#include "snipq/error.hpp"

namespace snipq {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DataError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
  }
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) throw DataError("cosine: non-finite component");
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

void EmbeddingStore::insert(std::string key, std::vector<double> vector) {
  if (vector.empty()) throw DataError("embedding '" + key + "' is empty");
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) {
    throw DataError("embedding '" + key + "' has dimension " + std::to_string(vector.size()) + ", expected " +
                    std::to_string(dimension_));
  }
  if (!std::all_of(vector.begin(), vector.end(), [](double x) { return std::isfinite(x); })) {
    throw DataError("embedding '" + key + "' has a non-finite component");
  }
  if (vectors_.contains(key)) throw DataError("duplicate embedding key '" + key + "'");
  keys_.push_back(key);
  vectors_.emplace(std::move(key), std::move(vector));
}

bool EmbeddingStore::contains(std::string_view key) const { return vectors_.contains(std::string(key)); }

std::span<const double> EmbeddingStore::at(std::string_view key) const {
  auto it = vectors_.find(std::string(key));
  if (it == vectors_.end()) throw DataError("missing embedding for key '" + std::string(key) + "'");
  return it->second;
}

EmbeddingStore parse_embeddings(std::istream& in, const std::string& source) {
  EmbeddingStore store;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(raw);
      const auto& key = obj.at("key");
      const auto& vec = obj.at("vector");
      if (!key.is_string()) throw DataError("field 'key' must be a string");
      if (!vec.is_array()) throw DataError("field 'vector' must be an array");
      std::vector<double> values;
      values.reserve(vec.size());
      for (const auto& x : vec) {
        if (!x.is_number()) throw DataError("non-finite or non-numeric component");
        values.push_back(x.get<double>());
      }
      store.insert(key.get<std::string>(), std::move(values));
    } catch (const nlohmann::json::exception& e) {
      throw LineError(source, line, e.what());
    } catch (const DataError& e) {
      throw LineError(source, line, e.what());
    }
  }
  if (store.size() == 0) throw DataError(source + ": empty embedding file");
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const EmbeddingStore& store) {
  for (const auto& key : store.keys()) {
    const auto v = store.at(key);
    nlohmann::json obj = {{"key", key}, {"vector", std::vector<double>(v.begin(), v.end())}};
    out << obj.dump() << '\n';
  }
}

double embedding_score(const EmbeddingStore& store, std::string_view query_key, std::string_view snippet_key) {
  if (!store.contains(query_key)) throw DataError("missing embedding for query key '" + std::string(query_key) + "'");
  if (!store.contains(snippet_key)) {
    throw DataError("missing embedding for snippet key '" + std::string(snippet_key) + "'");
  }
  return cosine(store.at(query_key), store.at(snippet_key));
}

}  // namespace snipq
