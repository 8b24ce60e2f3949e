#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace gpsr {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);

struct ChatMessage {
  Role role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 512;

  // Throws InvalidInput unless there is a user message, the last message is
  // from the user, temperature is in [0, 1] and the token limit is positive.
  void check() const;

  nlohmann::json to_json() const;
  static ChatRequest from_json(const nlohmann::json& j);
  // SHA-256 of the canonical JSON serialization; stable across processes.
  std::string digest() const;

  bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
  std::string content;  // may be empty
  std::string backend_id;
  std::chrono::milliseconds latency{0};
  nlohmann::json raw_metadata = nlohmann::json::object();
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual const std::string& id() const = 0;
  // Implementations must not keep per-episode state between calls: mocks and
  // replays derive everything from the request itself, so one handle can
  // serve concurrent episodes.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

using BackendHandle = std::shared_ptr<Backend>;

// Validates the request, then dispatches.
ChatResponse complete(Backend& backend, const ChatRequest& request);

// One request/response pair as it went over the wire.
struct Exchange {
  ChatRequest request;
  ChatResponse response;
};

// ---------------------------------------------------------------------------
// Mock backend

enum class Fault { corrupt_format, inject_unknown_action, truncate, empty };

std::string_view to_string(Fault f);
std::optional<Fault> parse_fault(std::string_view s);

// Deterministic rewrite of a well-formed answer into a known failure:
//   corrupt_format         [[look for obj, cola]] -> [look for obj(cola)]
//   inject_unknown_action  first action renamed to "find"
//   truncate               first half of the text
//   empty                  ""
std::string apply_fault(Fault fault, std::string_view content);

struct ScriptedTurn {
  // Absent: reply with the reference answer for the request.
  std::optional<std::string> text;
  std::optional<Fault> fault;
};

struct MockScript {
  std::vector<ScriptedTurn> turns;
  bool repeat_last = false;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
};

// gold, garbage, hallucinate-once, format-once, truncate-once, empty-once,
// call-syntax. Returns nullopt for other names.
std::optional<MockScript> builtin_script(std::string_view name);

// Reference plan text for a command, if known.
using GoldOracle = std::function<std::optional<std::string>(std::string_view command)>;

inline constexpr std::string_view kMockNoPlanReply = "I am not able to plan this command.";
inline constexpr std::string_view kMockAnswerReply =
    "I am a service robot and I am glad to help you with that.";

/// Scripted backend. The turn index is the number of assistant messages in
/// the request, so retries inside one episode walk the script while separate
/// episodes each start from turn 0.
class MockBackend : public Backend {
 public:
  MockBackend(std::string id, MockScript script, GoldOracle gold = {},
              std::chrono::milliseconds simulated_latency = std::chrono::milliseconds{0});

  const std::string& id() const override { return id_; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string id_;
  MockScript script_;
  GoldOracle gold_;
  std::chrono::milliseconds latency_;
};

// ---------------------------------------------------------------------------
// Transcripts and replay

struct TranscriptRecord {
  std::string digest;
  ChatRequest request;
  ChatResponse response;
};

struct Transcript {
  std::string backend_id;
  std::vector<TranscriptRecord> records;

  // Appends records whose digest is not present yet, preserving order.
  void merge(const Transcript& other);

  nlohmann::json to_json() const;
  static Transcript from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Transcript load(const std::filesystem::path& path);
};

Transcript record_transcript(std::span<const Exchange> exchanges, std::string backend_id);

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const Transcript& transcript);

  const std::string& id() const override { return id_; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string id_;
  std::map<std::string, ChatResponse> by_digest_;
};

// ---------------------------------------------------------------------------
// Generic chat-completion backend over HTTP(S)

struct HttpBackendConfig {
  std::string name;
  std::string endpoint;  // full URL of the chat-completion route
  std::string model;
  std::string model_field = "model";
  std::string auth_env;  // name of the env var holding the key; empty: no auth
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  double timeout_seconds = 60.0;
  int max_retries = 2;  // transport failures only
  int concurrency_limit = 4;

  static HttpBackendConfig from_json(const nlohmann::json& j);
};

// Reads {"schema": 1, "backends": [ ... ]}.
std::vector<HttpBackendConfig> load_backend_configs(const std::filesystem::path& path);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  const std::string& id() const override { return config_.name; }
  ChatResponse complete(const ChatRequest& request) override;

  // Body sent for a request: {"<model_field>": model, "messages": [...],
  // "temperature": t, "max_tokens": n}.
  nlohmann::json request_body(const ChatRequest& request) const;

  struct Limiter;

 private:
  HttpBackendConfig config_;
  std::string auth_value_;
  std::unique_ptr<Limiter> limiter_;
};

// ---------------------------------------------------------------------------

struct BackendContext {
  std::filesystem::path data_dir;
  std::optional<std::filesystem::path> backend_config;
  GoldOracle gold;
};

/// "mock:<name>"    built-in script, or data_dir/mocks/<name>.json, or a
///                  path ending in .json
/// "replay:<path>"  transcript file
/// "<name>"         entry of the backend config file
BackendHandle make_backend(std::string_view spec, const BackendContext& ctx);

}  // namespace gpsr
