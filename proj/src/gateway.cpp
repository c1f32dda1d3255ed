#include "iotguard/gateway.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "iotguard/errors.hpp"
#include "iotguard/hash.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace iotguard {

std::string canonical_request_json(const ChatRequest& req) {
  nlohmann::ordered_json j;
  j["model"] = req.model;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : req.messages) {
    nlohmann::ordered_json mj;
    mj["role"] = m.role;
    mj["content"] = m.content;
    j["messages"].push_back(std::move(mj));
  }
  j["temperature"] = req.temperature;
  return j.dump();
}

std::string request_hash(const ChatRequest& req) {
  return fnv1a64_hex(canonical_request_json(req));
}

HttpTransport::HttpTransport(const GatewayConfig& cfg) : cfg_(cfg) {
  const std::string& url = cfg.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("gateway URL must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = url;
    path_ = "/";
  } else {
    host_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

TransportReply HttpTransport::post(const std::string& body) {
  httplib::Client client(host_);
  client.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
  client.set_read_timeout(0, cfg_.timeout_ms * 1000LL);
  client.set_write_timeout(0, cfg_.timeout_ms * 1000LL);

  httplib::Headers headers;
  if (!cfg_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  }
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    return {0, httplib::to_string(res.error())};
  }
  return {res->status, res->body};
}

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw ConfigError("fixture directory does not exist: " + dir_.string());
  }
}

TransportReply FixtureTransport::post(const std::string& body) {
  const std::string hash = fnv1a64_hex(body);
  const auto path = dir_ / (hash + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TransportError("no fixture for request hash " + hash + " under " + dir_.string());
  }
  std::ostringstream text;
  text << in.rdbuf();

  nlohmann::json reply;
  reply["choices"] = nlohmann::json::array();
  reply["choices"].push_back(
      {{"message", {{"role", "assistant"}, {"content", text.str()}}},
       {"finish_reason", "stop"}});
  return {200, reply.dump()};
}

std::unique_ptr<ChatTransport> load_fixture_transport(const std::filesystem::path& dir) {
  return std::make_unique<FixtureTransport>(dir);
}

std::unique_ptr<ChatTransport> make_transport(const GatewayConfig& cfg) {
  if (!cfg.fixtures_dir.empty()) {
    return load_fixture_transport(cfg.fixtures_dir);
  }
  if (cfg.base_url.empty()) {
    throw ConfigError("gateway requires LLM_API_URL (or gateway.base_url) or a fixtures_dir");
  }
  return std::make_unique<HttpTransport>(cfg);
}

namespace {

ChatResponse parse_chat_body(const std::string& body, std::int64_t latency_ms) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("response is not valid JSON: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw ProtocolError("response has no choices");
  }
  const auto& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw ProtocolError("response choice has no message content");
  }
  ChatResponse resp;
  resp.content = choice["message"]["content"].get<std::string>();
  resp.finish_reason = choice.value("finish_reason", "");
  resp.latency_ms = latency_ms;
  return resp;
}

bool retryable_status(int status) {
  return status == 0 || status == 429 || status >= 500;
}

void backoff_sleep(const GatewayConfig& cfg, int attempt) {
  if (cfg.backoff_base_ms <= 0.0) return;
  static thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  const double cap = cfg.backoff_base_ms * std::pow(2.0, attempt);
  const double jitter =
      std::uniform_real_distribution<double>(0.0, cap)(jitter_rng);
  std::this_thread::sleep_for(
      std::chrono::milliseconds(static_cast<std::int64_t>(cap + jitter)));
}

}  // namespace

ChatResponse send_chat(const ChatRequest& req, const GatewayConfig& cfg, ChatTransport& transport) {
  if (req.messages.empty()) throw ConfigError("chat request needs at least one message");
  if (req.temperature < 0.0 || req.temperature > 2.0) {
    throw ConfigError("temperature must be in [0, 2]");
  }
  const std::string body = canonical_request_json(req);

  TransportReply reply;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) backoff_sleep(cfg, attempt - 1);
    const auto started = std::chrono::steady_clock::now();
    reply = transport.post(body);
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    if (reply.status == 200) {
      return parse_chat_body(reply.body, latency);
    }
    if (reply.status == 401 || reply.status == 403) {
      throw ConfigError("endpoint rejected credentials (HTTP " + std::to_string(reply.status) +
                        "); check LLM_API_KEY");
    }
    if (!retryable_status(reply.status)) {
      throw TransportError("endpoint returned HTTP " + std::to_string(reply.status) + ": " +
                           reply.body);
    }
  }
  const std::string reason =
      reply.status == 0 ? reply.body : "HTTP " + std::to_string(reply.status);
  throw TransportError("retries exhausted after " + std::to_string(cfg.max_retries + 1) +
                       " attempts; last failure: " + reason);
}

std::filesystem::path write_fixture(const std::filesystem::path& dir, const ChatRequest& req,
                                    const std::string& response_text) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (request_hash(req) + ".txt");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write fixture: " + path.string());
  out << response_text;
  return path;
}

}  // namespace iotguard
