#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>

#include "gpsr/errors.hpp"
#include "gpsr/llm_client.hpp"

namespace gpsr {

using nlohmann::json;

struct HttpBackend::Limiter {
  explicit Limiter(int n) : available(n) {}

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }

  std::mutex mu;
  std::condition_variable cv;
  int available;
};

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint '" + url + "' has no scheme");
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

class LimiterGuard {
 public:
  explicit LimiterGuard(HttpBackend::Limiter* l) : l_(l) { l_->acquire(); }
  ~LimiterGuard() { l_->release(); }
  LimiterGuard(const LimiterGuard&) = delete;
  LimiterGuard& operator=(const LimiterGuard&) = delete;

 private:
  HttpBackend::Limiter* l_;
};

}  // namespace

HttpBackendConfig HttpBackendConfig::from_json(const json& j) {
  HttpBackendConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    c.endpoint = j.at("endpoint").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.model_field = j.value("model_field", c.model_field);
    c.auth_env = j.value("auth_env", c.auth_env);
    c.auth_header = j.value("auth_header", c.auth_header);
    c.auth_prefix = j.value("auth_prefix", c.auth_prefix);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.concurrency_limit = j.value("concurrency_limit", c.concurrency_limit);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed backend config: ") + e.what());
  }
  if (j.contains("api_key")) throw SchemaError("backend config must not store secrets; use auth_env");
  if (c.timeout_seconds <= 0 || c.max_retries < 0 || c.concurrency_limit < 1) {
    throw SchemaError("backend '" + c.name + "' has invalid limits");
  }
  return c;
}

std::vector<HttpBackendConfig> load_backend_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open backend config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("backend config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (doc.value("schema", 0) != 1) throw SchemaError("backend config must declare schema: 1");
  std::vector<HttpBackendConfig> out;
  for (const auto& b : doc.value("backends", json::array())) out.push_back(HttpBackendConfig::from_json(b));
  return out;
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), limiter_(std::make_unique<Limiter>(config_.concurrency_limit)) {
  split_url(config_.endpoint);
  if (!config_.auth_env.empty()) {
    const char* key = std::getenv(config_.auth_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw UsageError("backend '" + config_.name + "' needs environment variable " + config_.auth_env);
    }
    auth_value_ = config_.auth_prefix + key;
  }
}

HttpBackend::~HttpBackend() = default;

json HttpBackend::request_body(const ChatRequest& request) const {
  json msgs = json::array();
  for (const auto& m : request.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json body;
  body[config_.model_field] = config_.model;
  body["messages"] = msgs;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  return body;
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  const Url url = split_url(config_.endpoint);
  const std::string body = request_body(request).dump();
  httplib::Headers headers;
  if (!auth_value_.empty()) headers.emplace(config_.auth_header, auth_value_);

  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  LimiterGuard guard(limiter_.get());
  std::string last_error;
  bool timed_out = false;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);

    auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url.path, headers, body, "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

    if (!res) {
      timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      timed_out = false;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError(config_.name + ": HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      json reply = json::parse(res->body);
      ChatResponse out;
      out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      out.backend_id = config_.name;
      out.latency = elapsed;
      out.raw_metadata = {{"status", res->status}, {"attempt", attempt + 1}};
      if (reply.contains("usage")) out.raw_metadata["usage"] = reply["usage"];
      return out;
    } catch (const json::exception& e) {
      throw TransportError(config_.name + ": malformed completion body: " + e.what());
    }
  }
  if (timed_out) throw Timeout(config_.name + ": " + last_error);
  throw TransportError(config_.name + ": " + last_error);
}

}  // namespace gpsr
