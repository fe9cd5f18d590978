#include "cohort/http_llm.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"

namespace cohort {

namespace {

void default_sleep(std::chrono::milliseconds d) {
  std::this_thread::sleep_for(d);
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || (status >= 500 && status < 600);
}

}  // namespace

TokenBucket::TokenBucket(double tokens_per_second, double burst, Clock clock,
                         Sleeper sleeper)
    : rate_(tokens_per_second),
      capacity_(burst < 1.0 ? 1.0 : burst),
      tokens_(capacity_),
      clock_(clock ? std::move(clock)
                   : [] { return std::chrono::steady_clock::now(); }),
      sleeper_(sleeper ? std::move(sleeper) : default_sleep) {
  if (rate_ < 0.0) throw ValidationError("requests_per_second must be >= 0");
  last_ = clock_();
}

void TokenBucket::acquire() {
  if (rate_ <= 0.0) return;  // unlimited
  const auto now = clock_();
  const double elapsed =
      std::chrono::duration<double>(now - last_).count();
  last_ = now;
  tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
  if (tokens_ < 1.0) {
    const double deficit_seconds = (1.0 - tokens_) / rate_;
    const auto wait = std::chrono::milliseconds(
        static_cast<long long>(deficit_seconds * 1000.0 + 0.999));
    sleeper_(wait);
    // Treat the sleep as fully elapsed; do not re-read the injected clock
    // (fake clocks do not advance on their own).
    tokens_ = std::min(capacity_, tokens_ + deficit_seconds * rate_);
    last_ = clock_();
  }
  tokens_ -= 1.0;
}

HttpLlmClient::HttpLlmClient(HttpLlmConfig config, Sleeper sleeper)
    : config_(std::move(config)),
      sleeper_(sleeper ? std::move(sleeper) : default_sleep),
      bucket_(config_.requests_per_second, config_.burst, {}, sleeper_) {
  if (config_.url.empty()) {
    throw ValidationError("http backend needs a url");
  }
  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("llm url must start with http:// or https://");
  }
  const std::string scheme = config_.url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported url scheme '" + scheme + "'");
  }
  const auto path_start = config_.url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_ = config_.url;
    path_ = "/";
  } else {
    base_ = config_.url.substr(0, path_start);
    path_ = config_.url.substr(path_start);
  }
  if (config_.max_attempts < 1) {
    throw ValidationError("max_attempts must be at least 1");
  }
}

LlmResponse HttpLlmClient::complete(const Prompt& prompt) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array();
  if (!config_.system_message.empty()) {
    body["messages"].push_back(
        {{"role", "system"}, {"content", config_.system_message}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", prompt.text}});
  body["temperature"] = config_.temperature;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str());
      key != nullptr && key[0] != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(base_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    bucket_.acquire();
    auto result = client.Post(path_, headers, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      last_status = 0;
    } else if (result->status >= 200 && result->status < 300) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(result->body);
      } catch (const nlohmann::json::parse_error&) {
        throw ApiError(result->status,
                       "llm endpoint returned a non-JSON body");
      }
      if (!doc.contains("choices") || !doc["choices"].is_array() ||
          doc["choices"].empty() ||
          !doc["choices"][0].contains("message") ||
          !doc["choices"][0]["message"].contains("content")) {
        throw ApiError(result->status,
                       "llm response is missing choices[0].message.content");
      }
      LlmResponse response;
      response.text =
          doc["choices"][0]["message"]["content"].get<std::string>();
      response.attempts = attempt;
      return response;
    } else if (retryable_status(result->status)) {
      last_error = "status " + std::to_string(result->status);
      last_status = result->status;
    } else {
      std::string excerpt = result->body.substr(0, 200);
      throw ApiError(result->status,
                     "llm endpoint answered status " +
                         std::to_string(result->status) +
                         (excerpt.empty() ? "" : ": " + excerpt));
    }
    if (attempt < config_.max_attempts) {
      long long backoff = config_.initial_backoff_ms;
      for (int i = 1; i < attempt; ++i) backoff *= 2;
      backoff = std::min<long long>(backoff, config_.max_backoff_ms);
      sleeper_(std::chrono::milliseconds(backoff));
    }
  }
  if (last_status != 0) {
    throw ApiError(last_status, "llm request failed after " +
                                    std::to_string(config_.max_attempts) +
                                    " attempts; last " + last_error);
  }
  throw TransportError("llm request failed after " +
                       std::to_string(config_.max_attempts) +
                       " attempts; last transport error: " + last_error);
}

std::string HttpLlmClient::cache_identity() const {
  return "http:" + config_.url + ":" + config_.model + ":" +
         std::to_string(config_.temperature);
}

}  // namespace cohort
