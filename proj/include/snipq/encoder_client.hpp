#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace snipq {

struct QuerySnippetText {
  std::string query;
  std::string snippet;
};

struct EncoderHealth {
  std::string status;
  std::string model;
  std::size_t dimension = 0;
};

/// HTTP client for the sentence-encoder service:
///   POST {base}/encode {"texts":[...]}            -> {"vectors":[[...]],"dimension":d}
///   POST {base}/score  {"pairs":[{query,snippet}]} -> {"scores":[...]}
///   GET  {base}/health                            -> {"status","model","dimension"}
///
/// Every call opens its own connection, so one client may be shared across threads.
/// Transport failures and non-200 responses raise IoError; malformed or inconsistent
/// payloads raise DataError.
class EncoderClient {
 public:
  explicit EncoderClient(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30),
                         std::optional<std::size_t> expected_dimension = std::nullopt);

  std::vector<std::vector<double>> encode(const std::vector<std::string>& texts) const;
  std::vector<double> score(const std::vector<QuerySnippetText>& pairs) const;
  EncoderHealth health() const;

  const std::string& base_url() const noexcept { return base_url_; }
  std::optional<std::size_t> expected_dimension() const noexcept { return expected_dimension_; }

 private:
  std::string post(const std::string& endpoint, const std::string& body) const;
  std::string get(const std::string& endpoint) const;

  std::string base_url_;
  std::string host_;       // scheme://host:port
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
  std::optional<std::size_t> expected_dimension_;
};

/// Free-function form of EncoderClient::encode.
std::vector<std::vector<double>> fetch_embeddings(const EncoderClient& client, const std::vector<std::string>& texts);

}  // namespace snipq
