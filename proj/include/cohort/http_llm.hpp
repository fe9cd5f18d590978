#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "cohort/llm.hpp"

namespace cohort {

struct HttpLlmConfig {
  // Full endpoint, e.g. "http://127.0.0.1:8080/v1/chat/completions".
  std::string url;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  // Optional system message prepended to the conversation.
  std::string system_message;
  // Name of the environment variable holding the bearer token. The key is
  // found only here — never in config files. When the variable is unset the
  // request is sent without an Authorization header.
  std::string api_key_env = "COHORT_LLM_API_KEY";
  int max_attempts = 3;
  int initial_backoff_ms = 200;
  int max_backoff_ms = 10'000;
  // 0 disables client-side rate limiting.
  double requests_per_second = 0.0;
  double burst = 1.0;
  int timeout_seconds = 60;
};

// Steady-state request pacing. acquire() sleeps (through the injected
// sleeper) until a token is available. Clock and sleeper are injectable so
// pacing is testable without real waiting. Single-threaded use.
class TokenBucket {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  TokenBucket(double tokens_per_second, double burst, Clock clock = {},
              Sleeper sleeper = {});

  void acquire();

 private:
  double rate_;
  double capacity_;
  double tokens_;
  Clock clock_;
  Sleeper sleeper_;
  std::chrono::steady_clock::time_point last_;
};

// Chat-completions transport. Sends
//   {"model": ..., "messages": [{"role": "user", "content": <prompt text>}],
//    "temperature": ...}
// and reads choices[0].message.content back. Retries transport failures and
// 408/429/5xx statuses with exponential backoff; other non-2xx statuses fail
// immediately as ApiError. The sleeper is injectable so tests measure the
// backoff schedule instead of waiting it out.
class HttpLlmClient final : public LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpLlmClient(HttpLlmConfig config, Sleeper sleeper = {});

  LlmResponse complete(const Prompt& prompt) override;
  std::string cache_identity() const override;

 private:
  HttpLlmConfig config_;
  Sleeper sleeper_;
  TokenBucket bucket_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace cohort
