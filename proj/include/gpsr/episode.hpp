#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpsr/executor.hpp"
#include "gpsr/llm_client.hpp"
#include "gpsr/planning_loop.hpp"

namespace gpsr {

// Everything one command went through: prompts and raw responses of the
// planning loop, question answering during execution, and the execution.
struct EpisodeTrace {
  std::string command;
  std::optional<PlanningResult> planning;
  std::vector<AnswerResult> answers;
  std::optional<ExecutionTrace> execution;

  // Planning attempts first, then answer attempts, each in call order.
  std::vector<Exchange> exchanges() const;
  nlohmann::json to_json() const;
};

Transcript record_transcript(const EpisodeTrace& episode, std::string backend_id);

}  // namespace gpsr
