#include "sfa/llm_gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include <json.hpp>

#ifdef SFA_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace sfa {

void validate(const ChatRequest& r) {
  if (r.messages.empty())
    throw InvariantViolation("chat request must have at least one message");
  if (r.temperature < 0.0 || r.temperature > 2.0)
    throw InvariantViolation("chat temperature must be in [0, 2]");
  if (r.max_output_tokens <= 0)
    throw InvariantViolation("max_output_tokens must be positive");
  if (r.model_id.empty()) throw InvariantViolation("model_id must be non-empty");
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

void fnv_bytes(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
}

void fnv_sep(std::uint64_t& h, char sep) {
  h ^= static_cast<unsigned char>(sep);
  h *= kFnvPrime;
}

}  // namespace

std::uint64_t request_digest(const ChatRequest& r) {
  std::uint64_t h = kFnvOffset;
  fnv_bytes(h, r.system_prompt);
  fnv_sep(h, '\x1e');
  for (const auto& m : r.messages) {
    fnv_sep(h, m.role == ChatRole::User ? 'U' : 'A');
    fnv_sep(h, '\x1f');
    fnv_bytes(h, m.text);
    fnv_sep(h, '\x1e');
  }
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.6f", r.temperature);
  fnv_bytes(h, temp);
  fnv_sep(h, '\x1e');
  fnv_bytes(h, r.model_id);
  return h;
}

std::string request_digest_hex(const ChatRequest& r) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(request_digest(r)));
  return buf;
}

std::vector<ChatResponse> complete_batch(ChatClient& client,
                                         const std::vector<ChatRequest>& requests,
                                         int max_concurrency) {
  const auto n = static_cast<std::ptrdiff_t>(requests.size());
  std::vector<ChatResponse> out(requests.size());
  std::vector<std::exception_ptr> failures(requests.size());
  const int threads = std::max(1, std::min<int>(max_concurrency, static_cast<int>(n)));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = client.complete(requests[i]);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

// ---------------------------------------------------------------- replay

ReplayChatClient ReplayChatClient::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open replay transcript: " + path);
  ReplayChatClient client;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad replay record: ") + e.what(), line_no);
    }
    ChatResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.prompt_tokens = j.at("prompt_tokens").get<long>();
    resp.completion_tokens = j.at("completion_tokens").get<long>();
    client.add(std::stoull(j.at("digest").get<std::string>(), nullptr, 16),
               std::move(resp));
  }
  return client;
}

void ReplayChatClient::add(std::uint64_t digest, ChatResponse response) {
  records_.emplace(digest, std::move(response));
}

ChatResponse ReplayChatClient::complete(const ChatRequest& request) {
  validate(request);
  const auto digest = request_digest(request);
  const auto it = records_.find(digest);
  if (it == records_.end())
    throw ReplayMiss("no recorded response for request digest " +
                     request_digest_hex(request));
  return it->second;
}

// ------------------------------------------------------------- recording

RecordingChatClient::RecordingChatClient(ChatClient& inner, const std::string& path)
    : inner_(inner), path_(path) {}

ChatResponse RecordingChatClient::complete(const ChatRequest& request) {
  ChatResponse resp = inner_.complete(request);
  nlohmann::ordered_json j;
  j["digest"] = request_digest_hex(request);
  j["text"] = resp.text;
  j["prompt_tokens"] = resp.prompt_tokens;
  j["completion_tokens"] = resp.completion_tokens;
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to replay transcript: " + path_);
  out << j.dump() << '\n';
  return resp;
}

// ------------------------------------------------------------------ http

namespace {

struct ParsedUrl {
  bool https = false;
  std::string host;
  int port = 0;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl p;
  std::string rest;
  if (url.rfind("https://", 0) == 0) {
    p.https = true;
    rest = url.substr(8);
  } else if (url.rfind("http://", 0) == 0) {
    rest = url.substr(7);
  } else {
    throw TransportError("endpoint URL must start with http:// or https://: " + url);
  }
  const auto slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  p.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = hostport.find(':');
  if (colon == std::string::npos) {
    p.host = hostport;
    p.port = p.https ? 443 : 80;
  } else {
    p.host = hostport.substr(0, colon);
    p.port = std::stoi(hostport.substr(colon + 1));
  }
  if (p.host.empty()) throw TransportError("endpoint URL has no host: " + url);
  return p;
}

nlohmann::json request_to_wire(const ChatRequest& r) {
  nlohmann::json body;
  body["model"] = r.model_id;
  body["temperature"] = r.temperature;
  body["max_tokens"] = r.max_output_tokens;
  auto& msgs = body["messages"] = nlohmann::json::array();
  if (!r.system_prompt.empty())
    msgs.push_back({{"role", "system"}, {"content", r.system_prompt}});
  for (const auto& m : r.messages)
    msgs.push_back({{"role", m.role == ChatRole::User ? "user" : "assistant"},
                    {"content", m.text}});
  return body;
}

ChatResponse response_from_wire(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unparseable completion response: ") + e.what());
  }
  try {
    ChatResponse resp;
    resp.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      resp.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      resp.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    return resp;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("completion response missing fields: ") + e.what());
  }
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
  validate(request);
  const ParsedUrl url = parse_url(config_.endpoint_url);
  const std::string body = request_to_wire(request).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto attempt_once = [&]() -> httplib::Result {
#ifdef SFA_HAVE_OPENSSL
    if (url.https) {
      httplib::SSLClient cli(url.host, url.port);
      cli.set_read_timeout(config_.timeout_s, 0);
      cli.set_connection_timeout(config_.timeout_s, 0);
      return cli.Post(url.path, headers, body, "application/json");
    }
#else
    if (url.https) throw TransportError("built without TLS support; use http://");
#endif
    httplib::Client cli(url.host, url.port);
    cli.set_read_timeout(config_.timeout_s, 0);
    cli.set_connection_timeout(config_.timeout_s, 0);
    return cli.Post(url.path, headers, body, "application/json");
  };

  std::string last_failure = "no attempt made";
  bool saw_rate_limit = false;
  for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      const double ms = config_.retry.initial_backoff_ms *
                        std::pow(config_.retry.multiplier, attempt - 1);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(ms)));
    }
    auto res = attempt_once();
    if (!res) {
      last_failure = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return response_from_wire(res->body);
    if (res->status == 401 || res->status == 403)
      throw AuthError("completion endpoint returned HTTP " +
                      std::to_string(res->status));
    if (res->status == 429 || res->status >= 500) {
      saw_rate_limit = res->status == 429;
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw TransportError("completion endpoint returned HTTP " +
                         std::to_string(res->status) + ": " + res->body);
  }
  if (saw_rate_limit)
    throw RateLimited("rate limited after " +
                      std::to_string(config_.retry.max_retries) + " retries");
  throw TransportError("request failed after retries: " + last_failure);
}

// ------------------------------------------------------------------ cost

Money usage_cost(const std::vector<ChatResponse>& responses, const TokenPrice& price) {
  if (price.per_prompt_token.micros() < 0 || price.per_completion_token.micros() < 0)
    throw InvariantViolation("token prices must be >= 0");
  Money total;
  for (const auto& r : responses) {
    total += price.per_prompt_token * r.prompt_tokens;
    total += price.per_completion_token * r.completion_tokens;
  }
  return total;
}

}  // namespace sfa
