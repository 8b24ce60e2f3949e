#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpsr/command_grammar.hpp"
#include "gpsr/episode.hpp"
#include "gpsr/llm_client.hpp"
#include "gpsr/planning_loop.hpp"
#include "gpsr/prompt_builder.hpp"

namespace gpsr {

class WorldModel;

struct DecompositionScore {
  bool correct = false;
  std::size_t matched = 0;      // positions where candidate and gold agree
  std::size_t denominator = 0;  // max of the two lengths
  double step_accuracy() const;
};

// Exact step-sequence equality after synonym resolution of arguments;
// step accuracy is positional agreement over the longer plan.
DecompositionScore score_decomposition(const Plan& candidate, const Plan& gold, const WorldModel& world);

struct EvalRecord {
  Command command;
  std::string backend_id;
  DecompositionScore score;
  bool planned = false;
  int attempts = 0;
  bool runs_to_success = false;  // candidate plan executed to terminal success
  bool executable = false;       // correct decomposition that also runs to success
  std::optional<std::string> backend_error;
  EpisodeTrace episode;
};

struct CategoryStats {
  int commands = 0;
  int exact = 0;
  double step_accuracy_sum = 0.0;
};

struct BackendRow {
  std::string backend_id;
  std::map<CommandCategory, CategoryStats> categories;
  int commands = 0;
  int decomposed = 0;
  int executable = 0;
  int unparseable = 0;
  int backend_errors = 0;
  long attempts = 0;  // over cells without backend errors
};

/// Table-1-shaped summary: one row per backend with exact-match rate and
/// mean step accuracy per command category, plus suite-wide decomposition
/// and executability rates.
struct EvalReport {
  std::uint64_t seed = 0;
  std::map<CommandCategory, int> counts;
  std::string world_digest;
  std::vector<BackendRow> rows;

  // decomposition rate >= executability rate on every row
  bool ordering_holds() const;
  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct EvalConfig {
  PlanningConfig planning;  // backend is replaced per cell
  bool execute = true;
};

struct EvalResult {
  EvalReport report;
  std::vector<EvalRecord> records;  // backend-major, suite order within a backend

  // Every exchange of one backend's cells, in suite order, without repeats.
  Transcript transcript(std::size_t backend_index) const;
};

EvalRecord evaluate_cell(const Command& command, const BackendHandle& backend, const WorldModel& world,
                         const EvalConfig& config);

// Cells run in parallel (OpenMP); aggregation folds them in suite order.
EvalResult evaluate_suite(const Suite& suite, const std::vector<BackendHandle>& backends, const WorldModel& world,
                          const EvalConfig& config);

// Single-threaded reference with identical output.
EvalResult evaluate_suite_serial(const Suite& suite, const std::vector<BackendHandle>& backends,
                                 const WorldModel& world, const EvalConfig& config);

// Gold plans for the mock backend: known suite commands first, then the
// prompt bank's examples, then any template binding in the world.
GoldOracle make_gold_oracle(std::shared_ptr<const WorldModel> world, std::shared_ptr<const PromptBank> bank,
                            std::shared_ptr<const TemplateBank> templates, std::vector<Command> known = {});

}  // namespace gpsr
