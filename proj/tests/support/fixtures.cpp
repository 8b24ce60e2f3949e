#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include "gpsr/evaluation.hpp"
#include "gpsr/plan_parser.hpp"

namespace gpsr::testing {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path data_path(const std::string& relative) { return fs::path(GPSR_DEFAULT_DATA_DIR) / relative; }

std::shared_ptr<const WorldModel> shared_world() {
  static auto w = std::make_shared<const WorldModel>(WorldModel::load(data_path("benchmark_world.json")));
  return w;
}

const WorldModel& benchmark_world() { return *shared_world(); }

std::shared_ptr<const PromptBank> default_bank() {
  static auto b = std::make_shared<const PromptBank>(PromptBank::load(data_path("prompt_bank.json")));
  return b;
}

std::shared_ptr<const TemplateBank> default_templates() {
  static auto t = std::make_shared<const TemplateBank>(TemplateBank::load(data_path("templates.json")));
  return t;
}

WorldModel tiny_world() {
  return WorldModel::from_json(json::parse(R"({
    "schema": 1,
    "rooms": ["kitchen", "bedroom"],
    "locations": {"initial location": "kitchen", "table": "kitchen", "shelf": "bedroom"},
    "objects": {"cup": "table", "book": "shelf"},
    "persons": {"Ann": {"gender": "female", "gesture": "pointing_left", "location": "shelf"}}
  })"));
}

std::vector<Scenario> reference_scenarios() {
  std::ifstream in(data_path("reference_scenarios.json"));
  json doc = json::parse(in);
  std::vector<Scenario> out;
  for (const auto& s : doc.at("scenarios")) {
    Scenario sc{s.at("name"), s.at("command"), s.at("plan"), {}};
    if (s.contains("script")) sc.script = InteractionScript::load(data_path(s.at("script")));
    out.push_back(std::move(sc));
  }
  return out;
}

PlanningConfig mock_config(MockScript script, std::string id) {
  PlanningConfig pc;
  pc.bank = default_bank();
  pc.backend = std::make_shared<MockBackend>(std::move(id), std::move(script),
                                             make_gold_oracle(shared_world(), default_bank(), default_templates()));
  return pc;
}

PlanningConfig mock_config(const std::string& builtin_name) {
  auto script = builtin_script(builtin_name);
  if (!script) throw std::invalid_argument("no builtin script " + builtin_name);
  return mock_config(*script, "mock:" + builtin_name);
}

Answerer fixed_answerer(std::string text) {
  return [text](std::string_view) {
    AnswerResult r;
    r.text = text;
    r.attempts = 1;
    return r;
  };
}

Plan plan_of(const std::string& text) {
  ParseOutcome o = parse(text);
  if (!o.parsed()) throw std::invalid_argument("test plan does not parse: " + text);
  return o.plan();
}

TempDir::TempDir() {
  std::random_device rd;
  path_ = fs::temp_directory_path() / ("gpsr-test-" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace gpsr::testing
