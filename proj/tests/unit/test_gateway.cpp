#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "evolmath/gateway.hpp"
#include "evolmath/parallel.hpp"

using namespace evolmath;

namespace {

GatewayConfig test_config() {
  GatewayConfig cfg;
  cfg.api_key = "test-key";
  cfg.model_id = "stub-model";
  cfg.backoff_base = std::chrono::milliseconds(1);
  cfg.backoff_cap = std::chrono::milliseconds(2);
  return cfg;
}

class CountingBackend : public Backend {
 public:
  std::string send(Role, const std::string&, const std::string& prompt, const CompletionParams&) override {
    ++calls;
    return "reply to " + prompt;
  }
  std::atomic<int> calls{0};
};

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             (name + "-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("gateway") {

TEST_CASE("echo stub returns the prompt") {
  Gateway g(test_config(), std::make_shared<EchoBackend>());
  CHECK(g.complete(Role::Solver, "hello") == "hello");
}

TEST_CASE("identical calls are served from the cache") {
  auto backend = std::make_shared<CountingBackend>();
  Gateway g(test_config(), backend);
  CHECK(g.complete(Role::Referee, "p") == "reply to p");
  CHECK(g.complete(Role::Referee, "p") == "reply to p");
  CHECK(backend->calls == 1);
  CHECK(g.cache_hits() == 1);
  g.complete(Role::Solver, "p");
  g.complete(Role::Referee, "p", CompletionParams{0.5, 2048});
  CHECK(backend->calls == 3);
}

TEST_CASE("cache keys separate every component") {
  const CompletionParams params;
  const auto base = cache_key("m", Role::Referee, "p", params);
  CHECK(base.size() == 64);
  CHECK(base == cache_key("m", Role::Referee, "p", params));
  CHECK(base != cache_key("n", Role::Referee, "p", params));
  CHECK(base != cache_key("m", Role::Solver, "p", params));
  CHECK(base != cache_key("m", Role::Referee, "q", params));
  CHECK(base != cache_key("m", Role::Referee, "p", CompletionParams{0.1, 2048}));
}

TEST_CASE("transient failures are retried") {
  auto flaky = std::make_shared<FlakyBackend>(2, std::make_shared<EchoBackend>());
  auto cfg = test_config();
  cfg.retry_limit = 3;
  Gateway g(cfg, flaky);
  CHECK(g.complete(Role::Solver, "x") == "x");
  CHECK(g.backend_calls() == 3);
}

TEST_CASE("exhausted retries raise a gateway error with the last status") {
  auto backend = std::make_shared<FunctionBackend>([](Role, const std::string&) -> std::string {
    throw TransientError("HTTP 503", 503);
  });
  auto cfg = test_config();
  cfg.retry_limit = 2;
  Gateway g(cfg, backend);
  try {
    g.complete(Role::Solver, "x");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.status() == 503);
  }
  CHECK(g.backend_calls() == 3);
}

TEST_CASE("permanent errors are not retried") {
  auto backend = std::make_shared<FunctionBackend>([](Role, const std::string&) -> std::string {
    throw GatewayError("HTTP 401", 401);
  });
  Gateway g(test_config(), backend);
  CHECK_THROWS_AS(g.complete(Role::Solver, "x"), GatewayError);
  CHECK(g.backend_calls() == 1);
}

TEST_CASE("disk cache survives a new gateway") {
  const auto dir = temp_dir("evolmath-cache");
  auto cfg = test_config();
  cfg.cache_dir = dir;
  auto first = std::make_shared<CountingBackend>();
  {
    Gateway g(cfg, first);
    CHECK(g.complete(Role::Polisher, "draft") == "reply to draft");
  }
  auto second = std::make_shared<CountingBackend>();
  Gateway g2(cfg, second);
  CHECK(g2.complete(Role::Polisher, "draft") == "reply to draft");
  CHECK(second->calls == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("in-flight requests are capped") {
  auto cfg = test_config();
  cfg.max_in_flight = 2;
  auto slow = std::make_shared<FunctionBackend>([](Role, const std::string& p) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    return p;
  });
  Gateway g(cfg, slow);
  parallel_for(16, 8, [&](std::size_t i) { g.complete(Role::Solver, "p" + std::to_string(i)); });
  CHECK(g.peak_in_flight() <= 2);
  CHECK(g.peak_in_flight() >= 1);
  CHECK(g.backend_calls() == 16);
}

TEST_CASE("referee score parsing") {
  CHECK(parse_referee_score("Difficulty: 7/10") == 7);
  CHECK(parse_referee_score("I rate this 10.") == 10);
  CHECK(parse_referee_score("Score = 3") == 3);
  CHECK(parse_referee_score("Among 12 steps, I'd say 4") == 4);
  CHECK_THROWS_AS(parse_referee_score("hard to say"), ParseError);
  CHECK_THROWS_AS(parse_referee_score("42"), ParseError);
}

TEST_CASE("configuration from the environment") {
  ::setenv("EVOLMATH_API_KEY", "k", 1);
  ::setenv("EVOLMATH_MODEL", "m", 1);
  ::setenv("EVOLMATH_BASE_URL", "http://127.0.0.1:1/v1", 1);
  const auto cfg = GatewayConfig::from_environment();
  CHECK(cfg.api_key == "k");
  CHECK(cfg.model_id == "m");
  CHECK(cfg.base_url == "http://127.0.0.1:1/v1");
  ::unsetenv("EVOLMATH_API_KEY");
  CHECK_THROWS_AS(GatewayConfig::from_environment(), ConfigError);
  ::unsetenv("EVOLMATH_MODEL");
  ::unsetenv("EVOLMATH_BASE_URL");
}

TEST_CASE("http backend against a local server") {
  httplib::Server server;
  std::string seen_auth;
  std::string seen_model;
  int hits = 0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (hits == 1) {
      res.status = 503;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    seen_model = body.at("model").get<std::string>();
    const std::string prompt = body.at("messages").at(0).at("content");
    nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cfg = test_config();
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.timeout = std::chrono::milliseconds(5000);
  Gateway g(cfg, std::make_shared<HttpBackend>(cfg));
  CHECK(g.complete(Role::Solver, "ping") == "echo: ping");
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer test-key");
  CHECK(seen_model == "stub-model");

  server.stop();
  t.join();
}

}  // TEST_SUITE
