#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "snipq/corpus.hpp"
#include "snipq/embedding.hpp"
#include "snipq/encoder_client.hpp"
#include "snipq/error.hpp"
#include "snipq/tfidf.hpp"

namespace snipq {

enum class ProviderKind { kTfIdf, kEmbeddingCosine, kScoreTable, kEncoderService };

std::string_view to_string(ProviderKind kind);

/// A (query, snippet) pair the provider cannot score. Never replaced by a default value.
class UnresolvedPairError : public DataError {
 public:
  UnresolvedPairError(const std::string& query_id, const std::string& snippet_id, const std::string& why)
      : DataError("cannot score pair (" + query_id + ", " + snippet_id + "): " + why),
        query_id_(query_id),
        snippet_id_(snippet_id) {}

  const std::string& query_id() const noexcept { return query_id_; }
  const std::string& snippet_id() const noexcept { return snippet_id_; }

 private:
  std::string query_id_;
  std::string snippet_id_;
};

/// A provider specialised to one query. Scoring a snippet must not depend on which
/// snippets were scored before.
class BoundQuery {
 public:
  virtual ~BoundQuery() = default;

  virtual double score(const Snippet& snippet) const = 0;

  /// Scores many snippets at once. The default loops over score(); remote providers
  /// override it to batch requests.
  virtual void score_batch(std::span<const Snippet* const> snippets, std::span<double> out) const;

  /// Whether score() may be called from several threads at once.
  virtual bool concurrent() const { return true; }
};

/// Turns (query, snippet) into a relevance score; higher means more relevant.
/// Providers are immutable after construction.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;

  virtual ProviderKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<BoundQuery> bind(const Query& query) const = 0;
};

double relevance_score(const ScoreProvider& provider, const Query& query, const Snippet& snippet);

/// Offline classifier output: (query_id, snippet_id) -> score in [0, 1].
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::string model_name, std::string source = {})
      : model_name_(std::move(model_name)), source_(std::move(source)) {}

  /// Throws DataError on duplicates or scores outside [0, 1].
  void insert(const std::string& query_id, const std::string& snippet_id, double score);
  std::optional<double> find(std::string_view query_id, std::string_view snippet_id) const;
  std::size_t size() const noexcept { return size_; }

  const std::string& model_name() const noexcept { return model_name_; }
  const std::string& source() const noexcept { return source_; }

  /// Checks that every key references a known query and snippet.
  void check_references(const EntityDatabase& db, std::span<const Query> queries) const;

 private:
  std::string model_name_;
  std::string source_;
  std::unordered_map<std::string, std::unordered_map<std::string, double>> scores_;
  std::size_t size_ = 0;
};

/// CSV `query_id,snippet_id,score`. The model name defaults to the file stem.
ScoreTable load_score_table(const std::filesystem::path& path);
ScoreTable parse_score_table(std::istream& in, const std::string& source, std::string model_name);
void write_score_table(std::ostream& out, const std::vector<std::tuple<std::string, std::string, double>>& rows);

/// Entailment-model output for one pair.
struct ThreeWayScores {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;
};

inline constexpr double kSimplexTolerance = 1e-6;

/// Neutral and contradiction collapse into "not relevant"; the entailment probability
/// is the relevance score. Throws DataError when the scores are off the simplex.
double snli_to_binary(const ThreeWayScores& scores);

/// CSV `query_id,snippet_id,entailment,neutral,contradiction`, mapped through snli_to_binary.
ScoreTable load_three_way_table(const std::filesystem::path& path);
ScoreTable parse_three_way_table(std::istream& in, const std::string& source, std::string model_name);

class TfIdfProvider final : public ScoreProvider {
 public:
  explicit TfIdfProvider(std::shared_ptr<const TfIdfIndex> index) : index_(std::move(index)) {}

  ProviderKind kind() const override { return ProviderKind::kTfIdf; }
  std::string name() const override { return "tfidf"; }
  std::unique_ptr<BoundQuery> bind(const Query& query) const override;

  const TfIdfIndex& index() const { return *index_; }

 private:
  std::shared_ptr<const TfIdfIndex> index_;
};

/// Cosine over stored embeddings keyed by query id and snippet id.
class EmbeddingProvider final : public ScoreProvider {
 public:
  EmbeddingProvider(std::shared_ptr<const EmbeddingStore> store, std::string name = "embedding")
      : store_(std::move(store)), name_(std::move(name)) {}

  ProviderKind kind() const override { return ProviderKind::kEmbeddingCosine; }
  std::string name() const override { return name_; }
  std::unique_ptr<BoundQuery> bind(const Query& query) const override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
  std::string name_;
};

class ScoreTableProvider final : public ScoreProvider {
 public:
  explicit ScoreTableProvider(std::shared_ptr<const ScoreTable> table) : table_(std::move(table)) {}

  ProviderKind kind() const override { return ProviderKind::kScoreTable; }
  std::string name() const override { return table_->model_name().empty() ? "table" : table_->model_name(); }
  std::unique_ptr<BoundQuery> bind(const Query& query) const override;

 private:
  std::shared_ptr<const ScoreTable> table_;
};

/// Scores through the encoder service's /score endpoint, batching per query.
class EncoderServiceProvider final : public ScoreProvider {
 public:
  explicit EncoderServiceProvider(EncoderClient client, std::size_t batch_size = 64)
      : client_(std::move(client)), batch_size_(batch_size == 0 ? 1 : batch_size) {}

  ProviderKind kind() const override { return ProviderKind::kEncoderService; }
  std::string name() const override { return "service"; }
  std::unique_ptr<BoundQuery> bind(const Query& query) const override;

 private:
  EncoderClient client_;
  std::size_t batch_size_;
};

}  // namespace snipq
