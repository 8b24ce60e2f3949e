#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "gpsr/errors.hpp"
#include "gpsr/llm_client.hpp"

namespace gpsr {
namespace {

using nlohmann::json;

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string endpoint(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

json reply(const std::string& content) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

ChatRequest request() {
  ChatRequest r;
  r.messages.push_back({Role::user, "Command: Go to the kitchen\nAnswer:"});
  return r;
}

HttpBackendConfig config(const LocalServer& s, const std::string& path) {
  HttpBackendConfig c;
  c.name = "local";
  c.endpoint = s.endpoint(path);
  c.model = "test-model";
  c.timeout_seconds = 2;
  c.max_retries = 2;
  return c;
}

TEST(HttpBackend, SendsBodyAndAuthAndReadsContent) {
  LocalServer s;
  json seen;
  std::string auth;
  s.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(reply("[[move to, kitchen]]").dump(), "application/json");
  });
  ::setenv("GPSR_TEST_KEY", "secret-value", 1);
  HttpBackendConfig c = config(s, "/v1/chat");
  c.auth_env = "GPSR_TEST_KEY";
  HttpBackend b(c);
  ChatResponse r = complete(b, request());
  EXPECT_EQ(r.content, "[[move to, kitchen]]");
  EXPECT_EQ(r.backend_id, "local");
  EXPECT_EQ(auth, "Bearer secret-value");
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["max_tokens"], 512);
}

TEST(HttpBackend, RetriesServerErrors) {
  LocalServer s;
  std::atomic<int> calls{0};
  s.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(reply("ok").dump(), "application/json");
  });
  HttpBackend b(config(s, "/chat"));
  EXPECT_EQ(b.complete(request()).content, "ok");
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
  LocalServer s;
  std::atomic<int> calls{0};
  s.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpBackend b(config(s, "/chat"));
  EXPECT_THROW(b.complete(request()), TransportError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpBackend, MalformedBody) {
  LocalServer s;
  s.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  HttpBackend b(config(s, "/chat"));
  EXPECT_THROW(b.complete(request()), TransportError);
}

TEST(HttpBackend, Timeout) {
  LocalServer s;
  s.server().Post("/slow", [&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(reply("late").dump(), "application/json");
  });
  HttpBackendConfig c = config(s, "/slow");
  c.timeout_seconds = 0.2;
  c.max_retries = 0;
  HttpBackend b(c);
  EXPECT_THROW(b.complete(request()), Timeout);
}

TEST(HttpBackend, MissingKeyVariable) {
  HttpBackendConfig c;
  c.name = "x";
  c.endpoint = "http://127.0.0.1:1/chat";
  c.model = "m";
  c.auth_env = "GPSR_TEST_KEY_THAT_IS_NOT_SET";
  ::unsetenv("GPSR_TEST_KEY_THAT_IS_NOT_SET");
  EXPECT_THROW(HttpBackend{c}, UsageError);
}

TEST(HttpBackendConfig, SecretsAreNotAccepted) {
  json j = {{"name", "x"}, {"endpoint", "http://h/c"}, {"model", "m"}, {"api_key", "sk-123"}};
  EXPECT_THROW(HttpBackendConfig::from_json(j), SchemaError);
  j.erase("api_key");
  EXPECT_EQ(HttpBackendConfig::from_json(j).name, "x");
}

}  // namespace
}  // namespace gpsr
