#include "cohort/http_llm.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "doctest.h"

using namespace cohort;
using namespace std::chrono;

namespace {

// A localhost chat-completions endpoint with a scripted status sequence and
// captured request state.
class LocalEndpoint {
 public:
  explicit LocalEndpoint(std::vector<int> statuses = {200})
      : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mutex_);
      requests_.push_back(req.body);
      auto auth = req.headers.find("Authorization");
      auth_headers_.push_back(auth == req.headers.end() ? "" : auth->second);
      const std::size_t i = requests_.size() - 1;
      const int status =
          i < statuses_.size() ? statuses_[i] : statuses_.back();
      res.status = status;
      if (status >= 200 && status < 300) {
        nlohmann::json body;
        body["choices"] = {{{"message", {{"content", reply_}}}}};
        res.set_content(body.dump(), "application/json");
      } else {
        res.set_content("scripted failure body", "text/plain");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LocalEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) +
           "/v1/chat/completions";
  }
  void set_reply(std::string reply) { reply_ = std::move(reply); }

  int hits() {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(requests_.size());
  }
  nlohmann::json request_json(std::size_t i) {
    std::lock_guard<std::mutex> lock(mutex_);
    return nlohmann::json::parse(requests_.at(i));
  }
  std::string auth_header(std::size_t i) {
    std::lock_guard<std::mutex> lock(mutex_);
    return auth_headers_.at(i);
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::vector<int> statuses_;
  std::string reply_ = "the disease indices are: (3)";
  std::mutex mutex_;
  std::vector<std::string> requests_;
  std::vector<std::string> auth_headers_;
};

struct RecordingSleeper {
  std::vector<long long>* log;
  void operator()(milliseconds d) const { log->push_back(d.count()); }
};

constexpr const char* kTestKeyEnv = "COHORT_TEST_API_KEY_7QX";

Prompt make_prompt(const std::string& text) {
  Prompt prompt;
  prompt.text = text;
  return prompt;
}

}  // namespace

TEST_CASE("the token bucket paces acquisitions through the injected sleeper") {
  auto now = steady_clock::now();
  auto fake_clock = [&now] { return now; };
  std::vector<long long> sleeps;
  auto sleeper = [&sleeps](milliseconds d) { sleeps.push_back(d.count()); };

  SUBCASE("rate zero never sleeps") {
    TokenBucket bucket(0.0, 1.0, fake_clock, sleeper);
    for (int i = 0; i < 5; ++i) bucket.acquire();
    CHECK(sleeps.empty());
  }

  SUBCASE("a drained bucket waits out the deficit") {
    TokenBucket bucket(2.0, 1.0, fake_clock, sleeper);
    bucket.acquire();  // burst token
    CHECK(sleeps.empty());
    bucket.acquire();
    bucket.acquire();
    CHECK(sleeps == std::vector<long long>{500, 500});
  }

  SUBCASE("elapsed time refills up to the burst capacity") {
    TokenBucket bucket(2.0, 1.0, fake_clock, sleeper);
    bucket.acquire();
    now += seconds(10);  // would earn 20 tokens, capped at burst = 1
    bucket.acquire();
    CHECK(sleeps.empty());
    bucket.acquire();  // cap means only one token was banked
    CHECK(sleeps == std::vector<long long>{500});
  }

  SUBCASE("burst allows consecutive unpaced requests") {
    TokenBucket bucket(1.0, 3.0, fake_clock, sleeper);
    bucket.acquire();
    bucket.acquire();
    bucket.acquire();
    CHECK(sleeps.empty());
    bucket.acquire();
    CHECK(sleeps == std::vector<long long>{1000});
  }

  SUBCASE("a sub-1 burst is raised to one token") {
    TokenBucket bucket(1.0, 0.0, fake_clock, sleeper);
    bucket.acquire();
    CHECK(sleeps.empty());
  }

  CHECK_THROWS_AS(TokenBucket(-1.0, 1.0, fake_clock, sleeper),
                  ValidationError);
}

TEST_CASE("a successful completion sends the documented request shape") {
  LocalEndpoint endpoint;
  unsetenv(kTestKeyEnv);

  HttpLlmConfig config;
  config.url = endpoint.url();
  config.model = "test-model";
  config.temperature = 0.25;
  config.api_key_env = kTestKeyEnv;
  HttpLlmClient client(config);

  const LlmResponse response = client.complete(make_prompt("classify [this]"));
  CHECK(response.text == "the disease indices are: (3)");
  CHECK(response.attempts == 1);
  CHECK(response.from_cache == false);
  REQUIRE(endpoint.hits() == 1);

  const nlohmann::json body = endpoint.request_json(0);
  CHECK(body.at("model") == "test-model");
  CHECK(body.at("temperature").get<double>() == 0.25);
  REQUIRE(body.at("messages").size() == 1);
  CHECK(body["messages"][0].at("role") == "user");
  CHECK(body["messages"][0].at("content") == "classify [this]");
  // No key in the environment: no Authorization header at all.
  CHECK(endpoint.auth_header(0) == "");
}

TEST_CASE("a configured system message leads the conversation") {
  LocalEndpoint endpoint;
  unsetenv(kTestKeyEnv);
  HttpLlmConfig config;
  config.url = endpoint.url();
  config.api_key_env = kTestKeyEnv;
  config.system_message = "You are a radiology assistant.";
  HttpLlmClient client(config);
  client.complete(make_prompt("report text"));

  const nlohmann::json body = endpoint.request_json(0);
  REQUIRE(body.at("messages").size() == 2);
  CHECK(body["messages"][0].at("role") == "system");
  CHECK(body["messages"][0].at("content") == "You are a radiology assistant.");
  CHECK(body["messages"][1].at("role") == "user");
}

TEST_CASE("the bearer token comes from the environment only") {
  LocalEndpoint endpoint;
  HttpLlmConfig config;
  config.url = endpoint.url();
  config.api_key_env = kTestKeyEnv;

  setenv(kTestKeyEnv, "sekret-token", 1);
  HttpLlmClient with_key(config);
  with_key.complete(make_prompt("p"));
  CHECK(endpoint.auth_header(0) == "Bearer sekret-token");

  // An empty value counts as unset.
  setenv(kTestKeyEnv, "", 1);
  HttpLlmClient empty_key(config);
  empty_key.complete(make_prompt("p"));
  CHECK(endpoint.auth_header(1) == "");

  unsetenv(kTestKeyEnv);
  HttpLlmClient no_key(config);
  no_key.complete(make_prompt("p"));
  CHECK(endpoint.auth_header(2) == "");
}

TEST_CASE("retryable statuses back off exponentially and then succeed") {
  LocalEndpoint endpoint({500, 500, 200});
  unsetenv(kTestKeyEnv);
  std::vector<long long> sleeps;
  HttpLlmConfig config;
  config.url = endpoint.url();
  config.api_key_env = kTestKeyEnv;
  config.max_attempts = 3;
  config.initial_backoff_ms = 200;
  HttpLlmClient client(config, RecordingSleeper{&sleeps});

  const LlmResponse response = client.complete(make_prompt("p"));
  CHECK(response.attempts == 3);
  CHECK(endpoint.hits() == 3);
  CHECK(sleeps == std::vector<long long>{200, 400});
}

TEST_CASE("429 is retryable and the backoff is capped") {
  LocalEndpoint endpoint({429, 429, 429, 200});
  unsetenv(kTestKeyEnv);
  std::vector<long long> sleeps;
  HttpLlmConfig config;
  config.url = endpoint.url();
  config.api_key_env = kTestKeyEnv;
  config.max_attempts = 4;
  config.initial_backoff_ms = 300;
  config.max_backoff_ms = 700;
  HttpLlmClient client(config, RecordingSleeper{&sleeps});

  const LlmResponse response = client.complete(make_prompt("p"));
  CHECK(response.attempts == 4);
  CHECK(sleeps == std::vector<long long>{300, 600, 700});
}

TEST_CASE("retries exhausted on a retryable status raise ApiError") {
  LocalEndpoint endpoint({503});
  unsetenv(kTestKeyEnv);
  std::vector<long long> sleeps;
  HttpLlmConfig config;
  config.url = endpoint.url();
  config.api_key_env = kTestKeyEnv;
  config.max_attempts = 2;
  HttpLlmClient client(config, RecordingSleeper{&sleeps});

  try {
    client.complete(make_prompt("p"));
    FAIL("expected ApiError");
  } catch (const ApiError& e) {
    CHECK(e.status() == 503);
  }
  CHECK(endpoint.hits() == 2);
  CHECK(sleeps == std::vector<long long>{200});
}

TEST_CASE("non-retryable statuses fail immediately with the body excerpt") {
  LocalEndpoint endpoint({401});
  unsetenv(kTestKeyEnv);
  std::vector<long long> sleeps;
  HttpLlmConfig config;
  config.url = endpoint.url();
  config.api_key_env = kTestKeyEnv;
  config.max_attempts = 5;
  HttpLlmClient client(config, RecordingSleeper{&sleeps});

  try {
    client.complete(make_prompt("p"));
    FAIL("expected ApiError");
  } catch (const ApiError& e) {
    CHECK(e.status() == 401);
    CHECK(std::string(e.what()).find("401") != std::string::npos);
    CHECK(std::string(e.what()).find("scripted failure body") !=
          std::string::npos);
  }
  CHECK(endpoint.hits() == 1);   // no second request
  CHECK(sleeps.empty());         // and no backoff
}

TEST_CASE("a malformed success body is an ApiError, not a retry") {
  unsetenv(kTestKeyEnv);

  // A 200 whose JSON lacks choices[0].message.content:
  httplib::Server bare;
  bare.Post("/v1/chat/completions",
            [](const httplib::Request&, httplib::Response& res) {
              res.set_content("{\"unexpected\": true}", "application/json");
            });
  const int port = bare.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&bare] { bare.listen_after_bind(); });
  bare.wait_until_ready();

  HttpLlmConfig config;
  config.url =
      "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.api_key_env = kTestKeyEnv;
  HttpLlmClient client(config);
  CHECK_THROWS_AS(client.complete(make_prompt("p")), ApiError);

  bare.stop();
  thread.join();
}

TEST_CASE("transport failures raise TransportError after all attempts") {
  unsetenv(kTestKeyEnv);
  // Bind a port, then close the listener so connections are refused.
  int dead_port = 0;
  {
    httplib::Server probe;
    dead_port = probe.bind_to_any_port("127.0.0.1");
    probe.stop();
  }
  REQUIRE(dead_port > 0);

  std::vector<long long> sleeps;
  HttpLlmConfig config;
  config.url =
      "http://127.0.0.1:" + std::to_string(dead_port) + "/v1/chat/completions";
  config.api_key_env = kTestKeyEnv;
  config.max_attempts = 2;
  config.timeout_seconds = 2;
  HttpLlmClient client(config, RecordingSleeper{&sleeps});
  CHECK_THROWS_AS(client.complete(make_prompt("p")), TransportError);
  CHECK(sleeps == std::vector<long long>{200});
}

TEST_CASE("endpoint configuration is validated") {
  HttpLlmConfig config;
  config.url = "";
  CHECK_THROWS_AS(HttpLlmClient{config}, ValidationError);
  config.url = "127.0.0.1:8080/v1";
  CHECK_THROWS_AS(HttpLlmClient{config}, ValidationError);
  config.url = "ftp://127.0.0.1/v1";
  CHECK_THROWS_AS(HttpLlmClient{config}, ValidationError);
  config.url = "http://127.0.0.1:8080/v1";
  config.max_attempts = 0;
  CHECK_THROWS_AS(HttpLlmClient{config}, ValidationError);
}

TEST_CASE("the cache identity pins endpoint, model and temperature") {
  HttpLlmConfig config;
  config.url = "http://127.0.0.1:9/v1/chat/completions";
  config.model = "m";
  config.temperature = 0.25;
  HttpLlmClient client(config);
  CHECK(client.cache_identity() ==
        "http:http://127.0.0.1:9/v1/chat/completions:m:" +
            std::to_string(0.25));
}
