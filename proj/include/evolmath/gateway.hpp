#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "evolmath/error.hpp"

namespace evolmath {

enum class Role { Referee, Polisher, Solver, Extractor };

std::string_view to_string(Role role) noexcept;

struct CompletionParams {
  double temperature = 0.0;
  int max_tokens = 2048;
};

/// Retryable failure: network errors, HTTP 429 and 5xx.
class TransientError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

struct GatewayConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model_id;
  std::size_t max_in_flight = 4;
  std::size_t retry_limit = 3;
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30000};
  std::filesystem::path cache_dir;  // empty: in-memory cache only

  /// Reads EVOLMATH_API_KEY, EVOLMATH_BASE_URL and EVOLMATH_MODEL.  A missing
  /// key or model is a ConfigError here, before any request is made.
  static GatewayConfig from_environment();

  void validate() const;
};

/// Transport behind the gateway.  Implementations throw TransientError for
/// retryable failures and GatewayError for permanent ones.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string send(Role role, const std::string& model, const std::string& prompt,
                           const CompletionParams& params) = 0;
};

/// Chat-completion endpoint: POST {base_url}/chat/completions.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(const GatewayConfig& cfg);
  std::string send(Role role, const std::string& model, const std::string& prompt,
                   const CompletionParams& params) override;

 private:
  std::string scheme_host_;
  std::string path_prefix_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Stubs.  With these installed the pipeline never touches the network.

class EchoBackend : public Backend {
 public:
  std::string send(Role, const std::string&, const std::string& prompt, const CompletionParams&) override {
    return prompt;
  }
};

class ConstantBackend : public Backend {
 public:
  explicit ConstantBackend(std::string reply) : reply_(std::move(reply)) {}
  std::string send(Role, const std::string&, const std::string&, const CompletionParams&) override {
    return reply_;
  }

 private:
  std::string reply_;
};

class FunctionBackend : public Backend {
 public:
  using Fn = std::function<std::string(Role, const std::string& prompt)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string send(Role role, const std::string&, const std::string& prompt, const CompletionParams&) override {
    return fn_(role, prompt);
  }

 private:
  Fn fn_;
};

/// Throws TransientError for the first `failures` calls, then delegates.
class FlakyBackend : public Backend {
 public:
  FlakyBackend(std::size_t failures, std::shared_ptr<Backend> inner)
      : remaining_(failures), inner_(std::move(inner)) {}
  std::string send(Role role, const std::string& model, const std::string& prompt,
                   const CompletionParams& params) override;

 private:
  std::mutex mu_;
  std::size_t remaining_;
  std::shared_ptr<Backend> inner_;
};

/// Caps the number of concurrently outstanding requests.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t limit) : limit_(limit) {}
  void acquire();
  void release();
  std::size_t peak() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t active_ = 0;
  std::size_t peak_ = 0;
};

/// Hex SHA-256 over model, role, prompt and params.
std::string cache_key(const std::string& model, Role role, const std::string& prompt,
                      const CompletionParams& params);

/// Client for every LLM role: content-addressed cache, exponential-backoff
/// retries and an in-flight cap.  Safe for concurrent use.
class Gateway {
 public:
  Gateway(GatewayConfig cfg, std::shared_ptr<Backend> backend);

  std::string complete(Role role, const std::string& prompt, const CompletionParams& params = {});

  const GatewayConfig& config() const noexcept { return cfg_; }
  std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }
  std::size_t peak_in_flight() const { return limiter_.peak(); }

 private:
  std::optional<std::string> cache_lookup(const std::string& key);
  void cache_store(const std::string& key, Role role, const std::string& prompt,
                   const CompletionParams& params, const std::string& reply);

  GatewayConfig cfg_;
  std::shared_ptr<Backend> backend_;
  InFlightLimiter limiter_;
  std::mutex cache_mu_;
  std::map<std::string, std::string> memory_cache_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> tmp_counter_{0};
};

/// First integer 0-10 after a score marker ("score", "difficulty", "rating",
/// "rate"), else the last standalone integer 0-10.  Throws ParseError.
int parse_referee_score(std::string_view reply);

}  // namespace evolmath
