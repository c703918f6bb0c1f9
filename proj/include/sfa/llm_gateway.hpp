#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sfa/errors.hpp"
#include "sfa/money.hpp"

namespace sfa {

class AuthError : public Error {
 public:
  using Error::Error;
};

class RateLimited : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ReplayMiss : public Error {
 public:
  using Error::Error;
};

enum class ChatRole { User, Assistant };

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<ChatMessage> messages;  // non-empty
  double temperature = 0.7;           // in [0, 2]
  std::string model_id = "gpt-4-0613";
  int max_output_tokens = 2048;

  bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;

  bool operator==(const ChatResponse&) const = default;
};

void validate(const ChatRequest& r);

// Stable digest of (system_prompt, messages, temperature, model_id).
// Prompt refactors change the digest and so deliberately invalidate
// recorded transcripts.
std::uint64_t request_digest(const ChatRequest& r);
std::string request_digest_hex(const ChatRequest& r);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Runs requests with at most `max_concurrency` in flight; results land at
// the index of their request, so output order never depends on completion
// order. The first (lowest-index) failure is rethrown.
std::vector<ChatResponse> complete_batch(ChatClient& client,
                                         const std::vector<ChatRequest>& requests,
                                         int max_concurrency);

struct RetryPolicy {
  int max_retries = 4;
  int initial_backoff_ms = 500;
  double multiplier = 2.0;
};

struct HttpClientConfig {
  std::string endpoint_url;  // e.g. https://api.openai.com/v1/chat/completions
  std::string api_key;
  RetryPolicy retry;
  int timeout_s = 120;
};

// OpenAI-style chat-completion endpoint, JSON over HTTP(S). Retries
// transient failures (429 and 5xx) with exponential backoff.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  HttpClientConfig config_;
};

// Deterministic offline stand-in: answers from a recorded transcript keyed
// by request digest and fails loudly on a miss.
class ReplayChatClient final : public ChatClient {
 public:
  static ReplayChatClient from_file(const std::string& path);
  ReplayChatClient() = default;

  void add(std::uint64_t digest, ChatResponse response);
  ChatResponse complete(const ChatRequest& request) override;
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::uint64_t, ChatResponse> records_;
};

// Wraps another client and appends digest/response pairs to a JSONL
// transcript that ReplayChatClient can load back.
class RecordingChatClient final : public ChatClient {
 public:
  RecordingChatClient(ChatClient& inner, const std::string& path);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  ChatClient& inner_;
  std::string path_;
  std::mutex mu_;
};

struct TokenPrice {
  Money per_prompt_token;
  Money per_completion_token;
};

// Exact fixed-point sum of token usage; additive over concatenation.
Money usage_cost(const std::vector<ChatResponse>& responses, const TokenPrice& price);

}  // namespace sfa
