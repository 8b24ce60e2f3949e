#include "gpsr/llm_client.hpp"

#include <fstream>
#include <set>
#include <thread>

#include "gpsr/digest.hpp"
#include "gpsr/errors.hpp"
#include "gpsr/plan_parser.hpp"
#include "gpsr/prompt_builder.hpp"

namespace gpsr {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

namespace {

Role parse_role(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw SchemaError("unknown message role '" + s + "'");
}

json response_to_json(const ChatResponse& r) {
  return {{"content", r.content}, {"backend_id", r.backend_id}, {"metadata", r.raw_metadata}};
}

ChatResponse response_from_json(const json& j) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  r.backend_id = j.at("backend_id").get<std::string>();
  r.raw_metadata = j.value("metadata", json::object());
  return r;
}

}  // namespace

void ChatRequest::check() const {
  bool has_user = false;
  for (const auto& m : messages) has_user = has_user || m.role == Role::user;
  if (!has_user || messages.back().role != Role::user) {
    throw InvalidInput("chat request must end with a user message");
  }
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw InvalidInput("temperature must lie in [0, 1]");
  }
  if (max_output_tokens <= 0) throw InvalidInput("max_output_tokens must be positive");
}

json ChatRequest::to_json() const {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return {{"messages", msgs}, {"temperature", temperature}, {"max_output_tokens", max_output_tokens}};
}

ChatRequest ChatRequest::from_json(const json& j) {
  ChatRequest r;
  for (const auto& m : j.at("messages")) {
    r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  r.temperature = j.at("temperature").get<double>();
  r.max_output_tokens = j.at("max_output_tokens").get<int>();
  return r;
}

std::string ChatRequest::digest() const { return sha256_hex(to_json().dump()); }

ChatResponse complete(Backend& backend, const ChatRequest& request) {
  request.check();
  return backend.complete(request);
}

// --- faults ----------------------------------------------------------------

std::string_view to_string(Fault f) {
  switch (f) {
    case Fault::corrupt_format: return "corrupt_format";
    case Fault::inject_unknown_action: return "inject_unknown_action";
    case Fault::truncate: return "truncate";
    case Fault::empty: return "empty";
  }
  return "empty";
}

std::optional<Fault> parse_fault(std::string_view s) {
  for (Fault f : {Fault::corrupt_format, Fault::inject_unknown_action, Fault::truncate, Fault::empty}) {
    if (s == to_string(f)) return f;
  }
  return std::nullopt;
}

std::string apply_fault(Fault fault, std::string_view content) {
  switch (fault) {
    case Fault::empty:
      return {};
    case Fault::truncate:
      return std::string(content.substr(0, content.size() / 2));
    case Fault::corrupt_format: {
      auto outcome = parse(content);
      if (!outcome.parsed()) return std::string(content);
      std::string out = "[";
      const auto& steps = outcome.plan().steps;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::string(surface_name(steps[i].kind)) + "(" + steps[i].argument + ")";
      }
      return out + "]";
    }
    case Fault::inject_unknown_action: {
      auto outcome = parse(content);
      if (!outcome.parsed()) return std::string(content);
      if (outcome.plan().empty()) return "[[find, object]]";
      std::string canonical = render(outcome.plan());
      auto name = surface_name(outcome.plan().steps.front().kind);
      return "[[find" + canonical.substr(2 + name.size());
    }
  }
  return std::string(content);
}

// --- mock --------------------------------------------------------------------

MockScript MockScript::from_json(const json& j) {
  MockScript s;
  try {
    s.repeat_last = j.value("repeat_last", false);
    for (const auto& t : j.at("turns")) {
      ScriptedTurn turn;
      if (t.is_string()) {
        turn.text = t.get<std::string>();
      } else {
        if (auto it = t.find("text"); it != t.end() && !it->is_null()) turn.text = it->get<std::string>();
        if (auto it = t.find("fault"); it != t.end() && !it->is_null()) {
          turn.fault = parse_fault(it->get<std::string>());
          if (!turn.fault) throw SchemaError("unknown fault '" + it->get<std::string>() + "'");
        }
      }
      s.turns.push_back(std::move(turn));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed mock script: ") + e.what());
  }
  if (s.turns.empty()) throw SchemaError("mock script has no turns");
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("mock script " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::optional<MockScript> builtin_script(std::string_view name) {
  auto gold_then = [](std::optional<Fault> first) {
    MockScript s;
    s.turns.push_back({std::nullopt, first});
    s.turns.push_back({std::nullopt, std::nullopt});
    s.repeat_last = true;
    return s;
  };
  if (name == "gold") return MockScript{{{std::nullopt, std::nullopt}}, true};
  if (name == "garbage") {
    return MockScript{{{std::string("I am not sure how to help with that."), std::nullopt}}, true};
  }
  if (name == "call-syntax") return MockScript{{{std::nullopt, Fault::corrupt_format}}, true};
  if (name == "hallucinate-once") return gold_then(Fault::inject_unknown_action);
  if (name == "format-once") return gold_then(Fault::corrupt_format);
  if (name == "truncate-once") return gold_then(Fault::truncate);
  if (name == "empty-once") return gold_then(Fault::empty);
  return std::nullopt;
}

MockBackend::MockBackend(std::string id, MockScript script, GoldOracle gold,
                         std::chrono::milliseconds simulated_latency)
    : id_(std::move(id)), script_(std::move(script)), gold_(std::move(gold)), latency_(simulated_latency) {
  if (script_.turns.empty()) throw InvalidInput("mock script has no turns");
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
  std::size_t turn = 0;
  for (const auto& m : request.messages) turn += m.role == Role::assistant ? 1 : 0;
  if (turn >= script_.turns.size()) {
    if (!script_.repeat_last) {
      throw ScriptExhausted("mock '" + id_ + "' has no turn " + std::to_string(turn + 1));
    }
    turn = script_.turns.size() - 1;
  }
  const ScriptedTurn& t = script_.turns[turn];

  std::string content;
  if (t.text) {
    content = *t.text;
  } else {
    for (const auto& m : request.messages) {
      if (m.role == Role::user) {
        if (is_answer_prompt(m.content)) {
          content = std::string(kMockAnswerReply);
        } else {
          std::optional<std::string> gold;
          if (gold_) gold = gold_(command_of_prompt(m.content));
          content = gold ? *gold : std::string(kMockNoPlanReply);
        }
        break;
      }
    }
  }
  if (t.fault) content = apply_fault(*t.fault, content);

  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  ChatResponse r;
  r.content = std::move(content);
  r.backend_id = id_;
  r.latency = latency_;
  r.raw_metadata = {{"turn", turn}};
  return r;
}

// --- transcripts -------------------------------------------------------------

void Transcript::merge(const Transcript& other) {
  std::map<std::string, bool> seen;
  for (const auto& r : records) seen[r.digest] = true;
  for (const auto& r : other.records) {
    if (seen.emplace(r.digest, true).second) records.push_back(r);
  }
}

json Transcript::to_json() const {
  json recs = json::array();
  for (const auto& r : records) {
    recs.push_back({{"digest", r.digest}, {"request", r.request.to_json()},
                    {"response", response_to_json(r.response)}});
  }
  return {{"schema", 1}, {"backend_id", backend_id}, {"records", recs}};
}

Transcript Transcript::from_json(const json& j) {
  Transcript t;
  try {
    if (j.value("schema", 0) != 1) throw SchemaError("transcript must declare schema: 1");
    t.backend_id = j.at("backend_id").get<std::string>();
    for (const auto& r : j.at("records")) {
      TranscriptRecord rec{r.at("digest").get<std::string>(), ChatRequest::from_json(r.at("request")),
                           response_from_json(r.at("response"))};
      if (rec.digest != rec.request.digest()) {
        throw SchemaError("transcript record digest does not match its request");
      }
      t.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed transcript: ") + e.what());
  }
  return t;
}

void Transcript::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write transcript " + path.string());
  out << to_json().dump(2) << "\n";
  if (!out) throw IoError("failed writing transcript " + path.string());
}

Transcript Transcript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("transcript " + path.string() + " is not valid JSON: " + e.what());
  }
}

Transcript record_transcript(std::span<const Exchange> exchanges, std::string backend_id) {
  Transcript t;
  t.backend_id = std::move(backend_id);
  std::set<std::string> seen;
  for (const auto& e : exchanges) {
    auto d = e.request.digest();
    if (seen.insert(d).second) t.records.push_back({std::move(d), e.request, e.response});
  }
  return t;
}

ReplayBackend::ReplayBackend(const Transcript& transcript) : id_(transcript.backend_id) {
  for (const auto& r : transcript.records) by_digest_.emplace(r.digest, r.response);
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  auto digest = request.digest();
  auto it = by_digest_.find(digest);
  if (it == by_digest_.end()) throw ReplayMiss("no recorded response for request " + digest);
  return it->second;
}

// --- factory -----------------------------------------------------------------

BackendHandle make_backend(std::string_view spec, const BackendContext& ctx) {
  if (spec.starts_with("mock:")) {
    std::string name(spec.substr(5));
    std::optional<MockScript> script = builtin_script(name);
    if (!script) {
      std::filesystem::path p = name;
      if (p.extension() != ".json") p = ctx.data_dir / "mocks" / (name + ".json");
      if (!std::filesystem::exists(p)) throw UsageError("unknown mock script '" + name + "'");
      script = MockScript::load(p);
    }
    return std::make_shared<MockBackend>(std::string(spec), std::move(*script), ctx.gold);
  }
  if (spec.starts_with("replay:")) {
    return std::make_shared<ReplayBackend>(Transcript::load(std::string(spec.substr(7))));
  }
  if (!ctx.backend_config) throw UsageError("backend '" + std::string(spec) + "' needs a backend config file");
  for (auto& cfg : load_backend_configs(*ctx.backend_config)) {
    if (cfg.name == spec) return std::make_shared<HttpBackend>(std::move(cfg));
  }
  throw UsageError("backend '" + std::string(spec) + "' is not defined in " +
                   ctx.backend_config->string());
}

}  // namespace gpsr
