#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gpsr/command_grammar.hpp"
#include "gpsr/executor.hpp"
#include "gpsr/llm_client.hpp"
#include "gpsr/planning_loop.hpp"
#include "gpsr/prompt_builder.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr::testing {

std::filesystem::path data_path(const std::string& relative);

const WorldModel& benchmark_world();
std::shared_ptr<const WorldModel> shared_world();
std::shared_ptr<const PromptBank> default_bank();
std::shared_ptr<const TemplateBank> default_templates();

// Two rooms, two objects, one person.
WorldModel tiny_world();

struct Scenario {
  std::string name;
  std::string command;
  std::string plan_text;
  InteractionScript script;
};

std::vector<Scenario> reference_scenarios();

// Planning config over the default bank with a scripted mock whose gold
// turns answer from the bank and templates.
PlanningConfig mock_config(MockScript script, std::string id = "mock:test");
PlanningConfig mock_config(const std::string& builtin_name);

Answerer fixed_answerer(std::string text);

Plan plan_of(const std::string& text);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace gpsr::testing
