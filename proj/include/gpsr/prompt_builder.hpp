#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpsr/primitives.hpp"

namespace gpsr {

class WorldModel;

inline constexpr std::string_view kFormatCorrection = "Please note the format of the answer!";
inline constexpr std::string_view kSubtaskCorrection =
    "Please note that scheduled subtasks need to be used to complete task planning.";
inline constexpr std::string_view kAnswerInstruction =
    "Please answer the following questions in English in no more than 30 words.";

std::string_view corrective_suffix(FailureKind kind);

struct FewShotExample {
  std::string command_text;
  Plan gold_plan;
  std::optional<std::string> note;
};

// Prompt scheme data: import-style primitive declarations, the parsing
// requirements and the few-shot examples, in the order they are offered.
class PromptBank {
 public:
  static PromptBank from_json(const nlohmann::json& doc);
  static PromptBank load(const std::filesystem::path& path);

  const std::string& declarations_header() const { return declarations_header_; }
  // One line per primitive, registry order.
  const std::vector<std::string>& declarations() const { return declarations_; }
  const std::string& requirements() const { return requirements_; }
  const std::vector<FewShotExample>& examples() const { return examples_; }

 private:
  std::string declarations_header_;
  std::vector<std::string> declarations_;
  std::string requirements_;
  std::vector<FewShotExample> examples_;
};

struct PromptConfig {
  // Whitespace-delimited words allowed in the rendered prompt.
  std::size_t token_budget = 2000;
};

struct PromptBundle {
  std::string declarations_block;
  std::string entities_block;
  std::string examples_block;
  std::string requirements_block;
  std::string task_block;
  std::vector<std::string> corrective_suffixes;
  std::size_t examples_included = 0;

  // Non-empty blocks joined by blank lines, in field order. Corrective
  // suffixes are sent as separate turns and are not part of this text.
  std::string render() const;
};

/// Blocks are assembled as declarations, entities, examples, requirements,
/// task. When the budget is tight examples are dropped from the end of the
/// bank; throws BudgetExceeded when even the fixed blocks do not fit.
PromptBundle build_prompt(std::string_view command_text, const WorldModel& world,
                          const PromptBank& bank, const PromptConfig& config);

// Requirements block is the 30-word answering instruction, task block is the
// question.
PromptBundle build_answer_prompt(std::string_view question, const PromptConfig& config);

// Text between the last "Command:" marker and the following newline of a
// rendered planning prompt; empty when absent.
std::string command_of_prompt(std::string_view prompt);
bool is_answer_prompt(std::string_view prompt);
std::string question_of_prompt(std::string_view prompt);

}  // namespace gpsr
