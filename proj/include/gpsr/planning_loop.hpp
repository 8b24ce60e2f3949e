#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gpsr/llm_client.hpp"
#include "gpsr/plan_parser.hpp"
#include "gpsr/primitives.hpp"
#include "gpsr/prompt_builder.hpp"

namespace gpsr {

class WorldModel;

enum class ValidationMode { parse_only, parse_and_static };

struct PlanningConfig {
  int max_consecutive_exceptions = 5;
  int max_answer_attempts = 5;
  BackendHandle backend;
  std::shared_ptr<const PromptBank> bank;
  PromptConfig prompt;
  ValidationMode validation = ValidationMode::parse_and_static;
  double temperature = 0.0;
  int max_output_tokens = 512;

  // Throws InvalidInput on a missing backend/bank or non-positive limits.
  void check() const;
};

struct Attempt {
  Exchange exchange;
  // What rejected (or accepted) the response: the parse outcome, or the
  // static validation report of a parsed plan.
  std::variant<ParseOutcome, ValidationReport> classification;
  // Corrective user turn sent after this attempt; absent for the final one.
  std::optional<std::string> corrective_suffix;

  bool succeeded() const;
  // Failure class driving the next suffix; nullopt on success.
  std::optional<FailureKind> failure_kind() const;
};

struct PlanningResult {
  std::optional<Plan> plan;  // set: Planned, absent: Unparseable
  int attempts = 0;
  std::vector<Attempt> attempt_log;

  bool planned() const { return plan.has_value(); }
};

/// Prompt, complete, parse and validate until a response is accepted or
/// max_consecutive_exceptions attempts have failed. After a failed attempt
/// the model's answer and the corrective suffix of its failure class are
/// appended as two new turns, so every retry extends the previous request.
/// Throws BackendUnavailable when the backend itself fails.
PlanningResult plan(std::string_view command_text, const WorldModel& world, const PlanningConfig& config);

struct AnswerAttempt {
  Exchange exchange;
  bool accepted = false;
  std::string reason;
};

struct AnswerResult {
  std::optional<std::string> text;  // absent: cannot answer
  int attempts = 0;
  std::vector<AnswerAttempt> log;

  bool answered() const { return text.has_value(); }
};

inline constexpr std::size_t kMaxAnswerWords = 30;

// A response is rejected when empty or longer than 30 words; gives up after
// max_answer_attempts rejections.
AnswerResult answer_question(std::string_view question, const PlanningConfig& config);

}  // namespace gpsr
