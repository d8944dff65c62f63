#include "snipq/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "snipq/csv.hpp"

namespace snipq {
namespace {

double parse_real(const std::string& field, const std::string& source, std::size_t line, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size() || !std::isfinite(v)) {
    throw LineError(source, line, std::string(what) + " '" + field + "' is not a finite number");
  }
  return v;
}

class TfIdfBound final : public BoundQuery {
 public:
  TfIdfBound(const TfIdfIndex& index, const Query& query)
      : index_(index), query_id_(query.id), vector_(index.vectorize(query.text)) {}

  double score(const Snippet& snippet) const override {
    auto row = index_.row(snippet.id);
    if (!row) throw UnresolvedPairError(query_id_, snippet.id, "snippet is not in the TF-IDF index");
    return index_.score(vector_, *row);
  }

 private:
  const TfIdfIndex& index_;
  std::string query_id_;
  SparseVector vector_;
};

class EmbeddingBound final : public BoundQuery {
 public:
  EmbeddingBound(const EmbeddingStore& store, const Query& query) : store_(store), query_id_(query.id) {}

  double score(const Snippet& snippet) const override {
    if (!store_.contains(query_id_)) {
      throw UnresolvedPairError(query_id_, snippet.id, "missing embedding for query key '" + query_id_ + "'");
    }
    if (!store_.contains(snippet.id)) {
      throw UnresolvedPairError(query_id_, snippet.id, "missing embedding for snippet key '" + snippet.id + "'");
    }
    return cosine(store_.at(query_id_), store_.at(snippet.id));
  }

 private:
  const EmbeddingStore& store_;
  std::string query_id_;
};

class TableBound final : public BoundQuery {
 public:
  TableBound(const ScoreTable& table, const Query& query) : table_(table), query_id_(query.id) {}

  double score(const Snippet& snippet) const override {
    auto v = table_.find(query_id_, snippet.id);
    if (!v) throw UnresolvedPairError(query_id_, snippet.id, "no entry in score table '" + table_.model_name() + "'");
    return *v;
  }

 private:
  const ScoreTable& table_;
  std::string query_id_;
};

class ServiceBound final : public BoundQuery {
 public:
  ServiceBound(const EncoderClient& client, std::size_t batch_size, const Query& query)
      : client_(client), batch_size_(batch_size), query_(query) {}

  double score(const Snippet& snippet) const override {
    const Snippet* one[] = {&snippet};
    double out = 0.0;
    score_batch(one, std::span<double>(&out, 1));
    return out;
  }

  void score_batch(std::span<const Snippet* const> snippets, std::span<double> out) const override {
    for (std::size_t begin = 0; begin < snippets.size(); begin += batch_size_) {
      const auto end = std::min(snippets.size(), begin + batch_size_);
      std::vector<QuerySnippetText> pairs;
      for (std::size_t i = begin; i < end; ++i) pairs.push_back({query_.text, snippets[i]->text});
      const auto scores = client_.score(pairs);
      for (std::size_t i = begin; i < end; ++i) {
        const double s = scores[i - begin];
        if (s < 0.0 || s > 1.0) {
          throw UnresolvedPairError(query_.id, snippets[i]->id, "service score " + std::to_string(s) + " outside [0,1]");
        }
        out[i] = s;
      }
    }
  }

  bool concurrent() const override { return false; }

 private:
  const EncoderClient& client_;
  std::size_t batch_size_;
  Query query_;
};

}  // namespace

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kTfIdf: return "tfidf";
    case ProviderKind::kEmbeddingCosine: return "embedding_cosine";
    case ProviderKind::kScoreTable: return "score_table";
    case ProviderKind::kEncoderService: return "encoder_service";
  }
  return "unknown";
}

void BoundQuery::score_batch(std::span<const Snippet* const> snippets, std::span<double> out) const {
  for (std::size_t i = 0; i < snippets.size(); ++i) out[i] = score(*snippets[i]);
}

double relevance_score(const ScoreProvider& provider, const Query& query, const Snippet& snippet) {
  return provider.bind(query)->score(snippet);
}

std::unique_ptr<BoundQuery> TfIdfProvider::bind(const Query& query) const {
  return std::make_unique<TfIdfBound>(*index_, query);
}

std::unique_ptr<BoundQuery> EmbeddingProvider::bind(const Query& query) const {
  return std::make_unique<EmbeddingBound>(*store_, query);
}

std::unique_ptr<BoundQuery> ScoreTableProvider::bind(const Query& query) const {
  return std::make_unique<TableBound>(*table_, query);
}

std::unique_ptr<BoundQuery> EncoderServiceProvider::bind(const Query& query) const {
  return std::make_unique<ServiceBound>(client_, batch_size_, query);
}

void ScoreTable::insert(const std::string& query_id, const std::string& snippet_id, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw DataError("score " + std::to_string(score) + " for (" + query_id + ", " + snippet_id + ") outside [0,1]");
  }
  if (!scores_[query_id].emplace(snippet_id, score).second) {
    throw DataError("duplicate score for (" + query_id + ", " + snippet_id + ")");
  }
  ++size_;
}

std::optional<double> ScoreTable::find(std::string_view query_id, std::string_view snippet_id) const {
  auto q = scores_.find(std::string(query_id));
  if (q == scores_.end()) return std::nullopt;
  auto s = q->second.find(std::string(snippet_id));
  if (s == q->second.end()) return std::nullopt;
  return s->second;
}

void ScoreTable::check_references(const EntityDatabase& db, std::span<const Query> queries) const {
  std::unordered_set<std::string> query_ids;
  for (const auto& q : queries) query_ids.insert(q.id);
  for (const auto& [qid, row] : scores_) {
    if (!query_ids.contains(qid)) throw DataError("score table '" + model_name_ + "' references unknown query '" + qid + "'");
    for (const auto& [sid, v] : row) {
      if (!db.find_snippet(sid)) {
        throw DataError("score table '" + model_name_ + "' references unknown snippet '" + sid + "'");
      }
    }
  }
}

ScoreTable parse_score_table(std::istream& in, const std::string& source, std::string model_name) {
  csv::Reader reader(in, source, {"query_id", "snippet_id", "score"});
  ScoreTable table(std::move(model_name), source);
  std::vector<std::string> f;
  while (reader.next(f)) {
    const double v = parse_real(f[2], source, reader.line(), "score");
    if (v < 0.0 || v > 1.0) throw LineError(source, reader.line(), "score " + f[2] + " outside [0,1]");
    try {
      table.insert(f[0], f[1], v);
    } catch (const DataError& e) {
      throw LineError(source, reader.line(), e.what());
    }
  }
  return table;
}

ScoreTable load_score_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_score_table(in, path.string(), path.stem().string());
}

void write_score_table(std::ostream& out, const std::vector<std::tuple<std::string, std::string, double>>& rows) {
  csv::write_row(out, {"query_id", "snippet_id", "score"});
  char buf[32];
  for (const auto& [q, s, v] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    csv::write_row(out, {q, s, buf});
  }
}

double snli_to_binary(const ThreeWayScores& s) {
  const bool finite = std::isfinite(s.entailment) && std::isfinite(s.neutral) && std::isfinite(s.contradiction);
  if (!finite || s.entailment < -kSimplexTolerance || s.neutral < -kSimplexTolerance ||
      s.contradiction < -kSimplexTolerance ||
      std::abs(s.entailment + s.neutral + s.contradiction - 1.0) > kSimplexTolerance) {
    throw DataError("three-way scores are not a probability distribution");
  }
  return std::clamp(s.entailment, 0.0, 1.0);
}

ScoreTable parse_three_way_table(std::istream& in, const std::string& source, std::string model_name) {
  csv::Reader reader(in, source, {"query_id", "snippet_id", "entailment", "neutral", "contradiction"});
  ScoreTable table(std::move(model_name), source);
  std::vector<std::string> f;
  while (reader.next(f)) {
    ThreeWayScores s{parse_real(f[2], source, reader.line(), "entailment"),
                     parse_real(f[3], source, reader.line(), "neutral"),
                     parse_real(f[4], source, reader.line(), "contradiction")};
    try {
      table.insert(f[0], f[1], snli_to_binary(s));
    } catch (const DataError& e) {
      throw LineError(source, reader.line(), e.what());
    }
  }
  return table;
}

ScoreTable load_three_way_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_three_way_table(in, path.string(), path.stem().string());
}

}  // namespace snipq
