#include "snipq/encoder_client.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "snipq/error.hpp"

namespace snipq {
namespace {

using nlohmann::json;

json parse_body(const std::string& body, const std::string& endpoint) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw DataError("malformed response from " + endpoint + ": " + e.what());
  }
}

double finite_number(const json& x, const std::string& endpoint) {
  if (!x.is_number()) throw DataError("malformed response from " + endpoint + ": expected a number");
  const double v = x.get<double>();
  if (!std::isfinite(v)) throw DataError("malformed response from " + endpoint + ": non-finite value");
  return v;
}

}  // namespace

EncoderClient::EncoderClient(std::string base_url, std::chrono::milliseconds timeout,
                             std::optional<std::size_t> expected_dimension)
    : base_url_(std::move(base_url)), timeout_(timeout), expected_dimension_(expected_dimension) {
  if (base_url_.empty()) throw DataError("encoder base URL must be nonempty");
  std::string rest = base_url_;
  std::string scheme = "http";
  if (auto pos = rest.find("://"); pos != std::string::npos) {
    scheme = rest.substr(0, pos);
    rest = rest.substr(pos + 3);
  }
  if (scheme != "http") throw DataError("unsupported encoder URL scheme '" + scheme + "' (only http)");
  const auto slash = rest.find('/');
  host_ = scheme + "://" + rest.substr(0, slash);
  if (slash != std::string::npos) path_prefix_ = rest.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (rest.substr(0, slash).empty()) throw DataError("encoder URL '" + base_url_ + "' has no host");
}

std::string EncoderClient::post(const std::string& endpoint, const std::string& body) const {
  httplib::Client cli(host_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_write_timeout(timeout_);
  auto res = cli.Post(path_prefix_ + endpoint, body, "application/json");
  if (!res) {
    throw IoError("encoder service " + base_url_ + endpoint + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw IoError("encoder service " + base_url_ + endpoint + " returned HTTP " + std::to_string(res->status) +
                  ": " + res->body);
  }
  return res->body;
}

std::string EncoderClient::get(const std::string& endpoint) const {
  httplib::Client cli(host_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  auto res = cli.Get(path_prefix_ + endpoint);
  if (!res) {
    throw IoError("encoder service " + base_url_ + endpoint + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw IoError("encoder service " + base_url_ + endpoint + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::vector<std::vector<double>> EncoderClient::encode(const std::vector<std::string>& texts) const {
  if (texts.empty()) throw DataError("empty batch");
  const auto doc = parse_body(post("/encode", json{{"texts", texts}}.dump()), "/encode");
  if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array()) {
    throw DataError("malformed response from /encode: missing 'vectors' array");
  }
  const auto& vectors = doc["vectors"];
  if (vectors.size() != texts.size()) {
    throw DataError("count mismatch: sent " + std::to_string(texts.size()) + " texts, received " +
                    std::to_string(vectors.size()) + " vectors");
  }
  std::optional<std::size_t> dim = expected_dimension_;
  if (doc.contains("dimension")) {
    if (!doc["dimension"].is_number_unsigned()) throw DataError("malformed response from /encode: bad 'dimension'");
    const auto declared = doc["dimension"].get<std::size_t>();
    if (dim && *dim != declared) {
      throw DataError("dimension mismatch: expected " + std::to_string(*dim) + ", service declared " +
                      std::to_string(declared));
    }
    dim = declared;
  }
  std::vector<std::vector<double>> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array()) throw DataError("malformed response from /encode: vector is not an array");
    std::vector<double> row;
    row.reserve(v.size());
    for (const auto& x : v) row.push_back(finite_number(x, "/encode"));
    if (!dim) dim = row.size();
    if (row.size() != *dim || row.empty()) {
      throw DataError("dimension mismatch: expected " + std::to_string(*dim) + ", got " + std::to_string(row.size()));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> EncoderClient::score(const std::vector<QuerySnippetText>& pairs) const {
  if (pairs.empty()) throw DataError("empty batch");
  json body = {{"pairs", json::array()}};
  for (const auto& p : pairs) body["pairs"].push_back({{"query", p.query}, {"snippet", p.snippet}});
  const auto doc = parse_body(post("/score", body.dump()), "/score");
  if (!doc.is_object() || !doc.contains("scores") || !doc["scores"].is_array()) {
    throw DataError("malformed response from /score: missing 'scores' array");
  }
  const auto& scores = doc["scores"];
  if (scores.size() != pairs.size()) {
    throw DataError("count mismatch: sent " + std::to_string(pairs.size()) + " pairs, received " +
                    std::to_string(scores.size()) + " scores");
  }
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(finite_number(s, "/score"));
  return out;
}

EncoderHealth EncoderClient::health() const {
  const auto doc = parse_body(get("/health"), "/health");
  try {
    return {doc.at("status").get<std::string>(), doc.value("model", std::string{}),
            doc.value("dimension", std::size_t{0})};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed response from /health: ") + e.what());
  }
}

std::vector<std::vector<double>> fetch_embeddings(const EncoderClient& client, const std::vector<std::string>& texts) {
  return client.encode(texts);
}

}  // namespace snipq
