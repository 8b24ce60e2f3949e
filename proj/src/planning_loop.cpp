#include "gpsr/planning_loop.hpp"

#include "gpsr/errors.hpp"
#include "gpsr/text.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr {

void PlanningConfig::check() const {
  if (!backend) throw InvalidInput("planning config has no backend");
  if (!bank) throw InvalidInput("planning config has no prompt bank");
  if (max_consecutive_exceptions < 1 || max_answer_attempts < 1) {
    throw InvalidInput("attempt limits must be at least 1");
  }
}

bool Attempt::succeeded() const { return !failure_kind().has_value(); }

std::optional<FailureKind> Attempt::failure_kind() const {
  if (const auto* p = std::get_if<ParseOutcome>(&classification)) {
    if (p->parsed()) return std::nullopt;
    return p->failure().kind;
  }
  // Every static rejection is a subtask problem, whether vocabulary, arity
  // or ordering.
  if (std::get<ValidationReport>(classification).valid()) return std::nullopt;
  return FailureKind::unknown_action;
}

namespace {

ChatResponse call(const PlanningConfig& config, const ChatRequest& request) {
  try {
    return complete(*config.backend, request);
  } catch (const BackendError& e) {
    throw BackendUnavailable(config.backend->id() + ": " + e.what());
  }
}

}  // namespace

PlanningResult plan(std::string_view command_text, const WorldModel& world, const PlanningConfig& config) {
  config.check();
  PromptBundle bundle = build_prompt(command_text, world, *config.bank, config.prompt);

  ChatRequest request;
  request.temperature = config.temperature;
  request.max_output_tokens = config.max_output_tokens;
  request.messages.push_back({Role::user, bundle.render()});

  PlanningResult result;
  for (int k = 1; k <= config.max_consecutive_exceptions; ++k) {
    ChatResponse response = call(config, request);
    ParseOutcome parsed = parse(response.content);

    Attempt attempt{{request, response}, parsed, std::nullopt};
    if (parsed.parsed() && config.validation == ValidationMode::parse_and_static) {
      ValidationReport report = validate_static(parsed.plan(), world);
      if (!report.valid()) attempt.classification = std::move(report);
    }
    result.attempts = k;

    auto failure = attempt.failure_kind();
    if (!failure) {
      result.plan = parsed.plan();
      result.attempt_log.push_back(std::move(attempt));
      return result;
    }
    if (k < config.max_consecutive_exceptions) {
      std::string suffix(corrective_suffix(*failure));
      attempt.corrective_suffix = suffix;
      bundle.corrective_suffixes.push_back(suffix);
      request.messages.push_back({Role::assistant, response.content});
      request.messages.push_back({Role::user, suffix});
    }
    result.attempt_log.push_back(std::move(attempt));
  }
  return result;
}

AnswerResult answer_question(std::string_view question, const PlanningConfig& config) {
  if (!config.backend) throw InvalidInput("planning config has no backend");
  PromptBundle bundle = build_answer_prompt(question, config.prompt);

  ChatRequest request;
  request.temperature = config.temperature;
  request.max_output_tokens = config.max_output_tokens;
  request.messages.push_back({Role::user, bundle.render()});

  AnswerResult result;
  for (int k = 1; k <= config.max_answer_attempts; ++k) {
    ChatResponse response = call(config, request);
    std::string answer = text::trim(response.content);
    std::size_t words = text::word_count(answer);
    result.attempts = k;

    AnswerAttempt attempt{{request, response}, false, {}};
    if (answer.empty()) {
      attempt.reason = "empty answer";
    } else if (words > kMaxAnswerWords) {
      attempt.reason = "answer has " + std::to_string(words) + " words";
    } else {
      attempt.accepted = true;
      result.text = answer;
      result.log.push_back(std::move(attempt));
      return result;
    }
    result.log.push_back(std::move(attempt));
    request.messages.push_back({Role::assistant, response.content});
    request.messages.push_back({Role::user, std::string(kAnswerInstruction)});
  }
  return result;
}

}  // namespace gpsr
