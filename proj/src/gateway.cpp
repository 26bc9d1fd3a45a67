#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "evolmath/gateway.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

namespace evolmath {

using nlohmann::json;

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::Referee: return "referee";
    case Role::Polisher: return "polisher";
    case Role::Solver: return "solver";
    case Role::Extractor: return "extractor";
  }
  return "?";
}

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

json params_json(const CompletionParams& p) {
  return json{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}};
}

}  // namespace

GatewayConfig GatewayConfig::from_environment() {
  GatewayConfig cfg;
  cfg.api_key = env_or("EVOLMATH_API_KEY", "");
  cfg.base_url = env_or("EVOLMATH_BASE_URL", cfg.base_url);
  cfg.model_id = env_or("EVOLMATH_MODEL", "");
  if (cfg.api_key.empty()) throw ConfigError("EVOLMATH_API_KEY is not set");
  if (cfg.model_id.empty()) throw ConfigError("EVOLMATH_MODEL is not set; the model id has no default");
  return cfg;
}

void GatewayConfig::validate() const {
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (model_id.empty()) throw ConfigError("gateway model id is required");
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(const GatewayConfig& cfg) : api_key_(cfg.api_key), timeout_(cfg.timeout) {
  if (api_key_.empty()) throw ConfigError("HTTP backend requires an API key");
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg.base_url, m, url)) throw ConfigError("malformed base URL: " + cfg.base_url);
  scheme_host_ = m[1];
  path_prefix_ = m[2];
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpBackend::send(Role, const std::string& model, const std::string& prompt,
                              const CompletionParams& params) {
  httplib::Client client(scheme_host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);

  json body;
  body["model"] = model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransientError("HTTP " + std::to_string(res->status), res->status);
  }
  if (res->status != 200) {
    throw GatewayError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), res->status);
  }
  try {
    const auto reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw GatewayError(std::string("malformed completion response: ") + e.what(), res->status);
  }
}

std::string FlakyBackend::send(Role role, const std::string& model, const std::string& prompt,
                               const CompletionParams& params) {
  {
    std::lock_guard lock(mu_);
    if (remaining_ > 0) {
      --remaining_;
      throw TransientError("injected failure", 503);
    }
  }
  return inner_->send(role, model, prompt, params);
}

// ---------------------------------------------------------------------------

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return active_ < limit_; });
  ++active_;
  peak_ = std::max(peak_, active_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --active_;
  }
  cv_.notify_one();
}

std::size_t InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::string cache_key(const std::string& model, Role role, const std::string& prompt,
                      const CompletionParams& params) {
  const json request{{"model", model}, {"role", to_string(role)}, {"prompt", prompt},
                     {"params", params_json(params)}};
  const std::string text = request.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

Gateway::Gateway(GatewayConfig cfg, std::shared_ptr<Backend> backend)
    : cfg_(std::move(cfg)), backend_(std::move(backend)), limiter_(cfg_.max_in_flight) {
  cfg_.validate();
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (!cfg_.cache_dir.empty()) std::filesystem::create_directories(cfg_.cache_dir);
}

std::optional<std::string> Gateway::cache_lookup(const std::string& key) {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = memory_cache_.find(key); it != memory_cache_.end()) return it->second;
  }
  if (cfg_.cache_dir.empty()) return std::nullopt;
  const auto path = cfg_.cache_dir / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto entry = json::parse(in);
    auto reply = entry.at("reply").get<std::string>();
    std::lock_guard lock(cache_mu_);
    memory_cache_.emplace(key, reply);
    return reply;
  } catch (const json::exception& e) {
    spdlog::warn("ignoring corrupt cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void Gateway::cache_store(const std::string& key, Role role, const std::string& prompt,
                          const CompletionParams& params, const std::string& reply) {
  {
    std::lock_guard lock(cache_mu_);
    memory_cache_.emplace(key, reply);
  }
  if (cfg_.cache_dir.empty()) return;
  const json entry{{"request",
                    {{"model", cfg_.model_id}, {"role", to_string(role)}, {"prompt", prompt},
                     {"params", params_json(params)}}},
                   {"reply", reply}};
  const auto path = cfg_.cache_dir / (key + ".json");
  auto tmp = path;
  tmp += ".tmp" + std::to_string(tmp_counter_.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << entry.dump();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) spdlog::warn("cache write failed for {}: {}", path.string(), ec.message());
}

std::string Gateway::complete(Role role, const std::string& prompt, const CompletionParams& params) {
  const std::string key = cache_key(cfg_.model_id, role, prompt, params);
  if (auto hit = cache_lookup(key)) {
    cache_hits_.fetch_add(1);
    return *hit;
  }

  std::string last_error;
  int last_status = 0;
  for (std::size_t attempt = 0; attempt <= cfg_.retry_limit; ++attempt) {
    if (attempt > 0) {
      const std::chrono::milliseconds delay = cfg_.backoff_base * (1LL << std::min<std::size_t>(attempt - 1, 20));
      std::this_thread::sleep_for(std::min(delay, cfg_.backoff_cap));
    }
    limiter_.acquire();
    try {
      backend_calls_.fetch_add(1);
      std::string reply = backend_->send(role, cfg_.model_id, prompt, params);
      limiter_.release();
      cache_store(key, role, prompt, params, reply);
      return reply;
    } catch (const TransientError& e) {
      limiter_.release();
      last_error = e.what();
      last_status = e.status();
      spdlog::debug("gateway: attempt {} for role {} failed: {}", attempt + 1, to_string(role), e.what());
    } catch (...) {
      limiter_.release();
      throw;
    }
  }
  throw GatewayError("gateway: retries exhausted (" + std::to_string(cfg_.retry_limit) +
                         "); last error: " + last_error,
                     last_status);
}

int parse_referee_score(std::string_view reply) {
  const std::string text(reply);
  static const std::regex marker(R"(\b(score|difficulty|rating|rated|rate)\b)", std::regex::icase);
  static const std::regex standalone(R"(\d+(?:\.\d+)?)");

  std::smatch m;
  if (std::regex_search(text, m, marker)) {
    const std::string rest = m.suffix().str();
    std::smatch n;
    if (std::regex_search(rest, n, standalone)) {
      const std::string tok = n.str();
      if (tok.find('.') == std::string::npos && tok.size() <= 2) {
        const int v = std::stoi(tok);
        if (v >= 0 && v <= 10) return v;
      }
    }
  }
  std::optional<int> last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), standalone); it != std::sregex_iterator(); ++it) {
    const std::string tok = it->str();
    if (tok.find('.') != std::string::npos || tok.size() > 2) continue;
    const int v = std::stoi(tok);
    if (v >= 0 && v <= 10) last = v;
  }
  if (!last) throw ParseError("no referee score in reply");
  return *last;
}

}  // namespace evolmath
