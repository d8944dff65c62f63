#pragma once

// In-process HTTP stub of the encoder service, for exercising EncoderClient.

#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace testing {

class StubEncoder {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json& request)>;

  StubEncoder(Handler encode, Handler score, int dimension = 3) {
    server_.Post("/encode", [encode](const httplib::Request& req, httplib::Response& res) {
      auto body = nlohmann::json::parse(req.body);
      if (body.at("texts").empty()) {
        res.status = 400;
        res.set_content(R"({"error":"empty batch"})", "application/json");
        return;
      }
      res.set_content(encode(body).dump(), "application/json");
    });
    server_.Post("/score", [score](const httplib::Request& req, httplib::Response& res) {
      res.set_content(score(nlohmann::json::parse(req.body)).dump(), "application/json");
    });
    server_.Get("/health", [dimension](const httplib::Request&, httplib::Response& res) {
      res.set_content(nlohmann::json{{"status", "ok"}, {"model", "stub"}, {"dimension", dimension}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubEncoder() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

/// Deterministic fake embedding: a small function of the text bytes.
inline std::vector<double> fake_vector(const std::string& text, int dimension = 3) {
  std::vector<double> v(static_cast<std::size_t>(dimension), 0.0);
  for (std::size_t i = 0; i < text.size(); ++i) v[i % v.size()] += static_cast<unsigned char>(text[i]) / 100.0;
  return v;
}

}  // namespace testing
