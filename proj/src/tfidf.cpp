#include "snipq/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "snipq/error.hpp"

namespace snipq {
namespace {

bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

std::map<std::string, std::uint32_t> term_counts(std::string_view text) {
  std::map<std::string, std::uint32_t> counts;
  for (auto& t : tokenize(text)) ++counts[std::move(t)];
  return counts;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

SparseVector SparseVector::from_unsorted(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector v;
  for (const auto& e : entries) {
    if (!v.entries_.empty() && v.entries_.back().first == e.first) {
      v.entries_.back().second += e.second;
    } else {
      v.entries_.push_back(e);
    }
  }
  std::erase_if(v.entries_, [](const Entry& e) { return !(e.second > 0.0); });
  return v;
}

double SparseVector::norm() const {
  double sum = 0.0;
  for (const auto& [col, w] : entries_) sum += w * w;
  return std::sqrt(sum);
}

double dot(const SparseVector& a, const SparseVector& b) {
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  double sum = 0.0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].first < eb[j].first) {
      ++i;
    } else if (eb[j].first < ea[i].first) {
      ++j;
    } else {
      sum += ea[i].second * eb[j].second;
      ++i;
      ++j;
    }
  }
  return sum;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), 0.0, 1.0);
}

TfIdfIndex TfIdfIndex::build(std::span<const Snippet> snippets) {
  if (snippets.empty()) throw DataError("cannot build a TF-IDF index from zero snippets");

  std::vector<std::map<std::string, std::uint32_t>> counts;
  counts.reserve(snippets.size());
  std::map<std::string, std::size_t> df;
  for (const auto& s : snippets) {
    counts.push_back(term_counts(s.text));
    for (const auto& [term, n] : counts.back()) ++df[term];
  }
  if (df.empty()) throw DataError("every snippet tokenizes to empty; nothing to index");

  TfIdfIndex index;
  index.doc_count_ = snippets.size();
  const double n_docs = static_cast<double>(index.doc_count_);
  for (const auto& [term, d] : df) {
    index.terms_.push_back(term);
    index.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(d))) + 1.0);
  }
  index.rebuild_lookups();

  index.vectors_.reserve(snippets.size());
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    std::vector<SparseVector::Entry> entries;
    for (const auto& [term, n] : counts[i]) {
      const auto col = index.vocabulary_.at(term);
      entries.emplace_back(col, static_cast<double>(n) * index.idf_[col]);
    }
    index.snippet_ids_.push_back(snippets[i].id);
    index.vectors_.push_back(SparseVector::from_unsorted(std::move(entries)));
  }
  index.rebuild_lookups();
  return index;
}

void TfIdfIndex::rebuild_lookups() {
  vocabulary_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) vocabulary_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  row_by_id_.clear();
  for (std::size_t i = 0; i < snippet_ids_.size(); ++i) {
    if (!row_by_id_.emplace(snippet_ids_[i], i).second) {
      throw DataError("duplicate snippet id '" + snippet_ids_[i] + "' in TF-IDF index");
    }
  }
  norms_.clear();
  for (const auto& v : vectors_) norms_.push_back(v.norm());
}

SparseVector TfIdfIndex::vectorize(std::string_view text) const {
  std::vector<SparseVector::Entry> entries;
  for (const auto& [term, n] : term_counts(text)) {
    auto it = vocabulary_.find(term);
    if (it == vocabulary_.end()) continue;
    entries.emplace_back(it->second, static_cast<double>(n) * idf_[it->second]);
  }
  return SparseVector::from_unsorted(std::move(entries));
}

std::int64_t TfIdfIndex::column(std::string_view token) const {
  auto it = vocabulary_.find(std::string(token));
  return it == vocabulary_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

double TfIdfIndex::idf(std::string_view token) const {
  const auto col = column(token);
  if (col < 0) throw DataError("token '" + std::string(token) + "' is not in the vocabulary");
  return idf_[static_cast<std::size_t>(col)];
}

std::optional<std::size_t> TfIdfIndex::row(std::string_view snippet_id) const {
  auto it = row_by_id_.find(std::string(snippet_id));
  if (it == row_by_id_.end()) return std::nullopt;
  return it->second;
}

double TfIdfIndex::score(const SparseVector& query, std::size_t row) const {
  const double nq = query.norm();
  const double ns = norms_.at(row);
  if (nq == 0.0 || ns == 0.0) return 0.0;
  return std::clamp(dot(query, vectors_[row]) / (nq * ns), 0.0, 1.0);
}

double TfIdfIndex::score(std::string_view query_text, std::string_view snippet_id) const {
  auto r = row(snippet_id);
  if (!r) throw DataError("snippet '" + std::string(snippet_id) + "' is not in the TF-IDF index");
  return score(vectorize(query_text), *r);
}

std::vector<double> TfIdfIndex::score_all_serial(const SparseVector& query) const {
  std::vector<double> out(vectors_.size());
  for (std::size_t r = 0; r < vectors_.size(); ++r) out[r] = score(query, r);
  return out;
}

std::vector<double> TfIdfIndex::score_all(const SparseVector& query) const {
  std::vector<double> out(vectors_.size());
  const double nq = query.norm();
  const auto rows = static_cast<std::int64_t>(vectors_.size());
  if (nq == 0.0) return out;
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto i = static_cast<std::size_t>(r);
    out[i] = norms_[i] == 0.0 ? 0.0 : std::clamp(dot(query, vectors_[i]) / (nq * norms_[i]), 0.0, 1.0);
  }
  return out;
}

void TfIdfIndex::save(std::ostream& out) const {
  nlohmann::json doc;
  doc["doc_count"] = doc_count_;
  doc["terms"] = terms_;
  doc["idf"] = idf_;
  auto& snippets = doc["snippets"] = nlohmann::json::array();
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    std::vector<std::uint32_t> cols;
    std::vector<double> weights;
    for (const auto& [c, w] : vectors_[i].entries()) {
      cols.push_back(c);
      weights.push_back(w);
    }
    snippets.push_back({{"id", snippet_ids_[i]}, {"columns", cols}, {"weights", weights}});
  }
  out << kTfIdfMagic << '\n' << doc.dump() << '\n';
}

TfIdfIndex TfIdfIndex::load(std::istream& in, const std::string& source) {
  std::string magic;
  std::getline(in, magic);
  if (magic != kTfIdfMagic) {
    throw LineError(source, 1, "not a TF-IDF index (expected magic '" + std::string(kTfIdfMagic) + "')");
  }
  TfIdfIndex index;
  try {
    const auto doc = nlohmann::json::parse(in);
    index.doc_count_ = doc.at("doc_count").get<std::size_t>();
    index.terms_ = doc.at("terms").get<std::vector<std::string>>();
    index.idf_ = doc.at("idf").get<std::vector<double>>();
    if (index.terms_.size() != index.idf_.size()) throw DataError("terms and idf differ in length");
    if (!std::is_sorted(index.terms_.begin(), index.terms_.end())) throw DataError("terms are not sorted");
    for (const auto& s : doc.at("snippets")) {
      const auto cols = s.at("columns").get<std::vector<std::uint32_t>>();
      const auto weights = s.at("weights").get<std::vector<double>>();
      if (cols.size() != weights.size()) throw DataError("columns and weights differ in length");
      std::vector<SparseVector::Entry> entries;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] >= index.terms_.size()) throw DataError("column id out of vocabulary range");
        if (i > 0 && cols[i] <= cols[i - 1]) throw DataError("column ids must be strictly increasing");
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw DataError("weights must be positive and finite");
        entries.emplace_back(cols[i], weights[i]);
      }
      index.snippet_ids_.push_back(s.at("id").get<std::string>());
      index.vectors_.push_back(SparseVector::from_unsorted(std::move(entries)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed TF-IDF index: " + e.what());
  } catch (const LineError&) {
    throw;
  } catch (const DataError& e) {
    throw DataError(source + ": malformed TF-IDF index: " + e.what());
  }
  index.rebuild_lookups();
  return index;
}

void TfIdfIndex::save(const std::filesystem::path& path) const {
  auto out = open_output(path);
  save(out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TfIdfIndex TfIdfIndex::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load(in, path.string());
}

double tfidf_score(const TfIdfIndex& index, std::string_view query_text, std::string_view snippet_id) {
  return index.score(query_text, snippet_id);
}

}  // namespace snipq
