#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace iotguard {

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
};

struct ChatResponse {
  std::string content;
  std::string finish_reason;
  std::int64_t latency_ms = 0;
};

struct GatewayConfig {
  std::string base_url;      // full endpoint URL, e.g. https://host/v1/chat/completions
  std::string api_key;       // sent as a bearer token when non-empty
  std::string model = "gpt-4";
  int timeout_ms = 30000;
  int max_retries = 3;
  double backoff_base_ms = 250.0;  // exponential with jitter
  std::string fixtures_dir;        // when set, replay from fixtures instead of HTTP
};

// Stable key order (model, messages, temperature), compact separators —
// fixture hashes depend on these bytes.
std::string canonical_request_json(const ChatRequest& req);
std::string request_hash(const ChatRequest& req);  // fnv1a-64, 16 hex chars

struct TransportReply {
  int status = 0;  // 0 means connection-level failure (retryable); body holds the reason
  std::string body;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual TransportReply post(const std::string& body) = 0;
};

// POSTs the canonical request body to cfg.base_url with a JSON content type.
class HttpTransport : public ChatTransport {
 public:
  explicit HttpTransport(const GatewayConfig& cfg);
  TransportReply post(const std::string& body) override;

 private:
  GatewayConfig cfg_;
  std::string host_;  // scheme://host[:port]
  std::string path_;
};

// Replays responses from <dir>/<request-hash>.txt; a file holds the assistant
// text verbatim. Unmatched requests fail, naming the hash they looked for.
class FixtureTransport : public ChatTransport {
 public:
  explicit FixtureTransport(std::filesystem::path dir);
  TransportReply post(const std::string& body) override;

 private:
  std::filesystem::path dir_;
};

std::unique_ptr<ChatTransport> load_fixture_transport(const std::filesystem::path& dir);

// Builds a transport from the config: fixtures when fixtures_dir is set,
// HTTP otherwise. Missing base_url is a configuration error.
std::unique_ptr<ChatTransport> make_transport(const GatewayConfig& cfg);

// Sends the request, retrying 429/5xx/connection failures with exponential
// backoff. 401/403 fail immediately as configuration errors; other 4xx fail
// immediately as transport errors; malformed response bodies are protocol
// errors.
ChatResponse send_chat(const ChatRequest& req, const GatewayConfig& cfg, ChatTransport& transport);

// Writes the fixture file send_chat would replay for this request; used to
// record deterministic test and demo fixtures.
std::filesystem::path write_fixture(const std::filesystem::path& dir, const ChatRequest& req,
                                    const std::string& response_text);

}  // namespace iotguard
