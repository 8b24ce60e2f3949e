#include "gpsr/prompt_builder.hpp"

#include <fstream>

#include "gpsr/errors.hpp"
#include "gpsr/plan_parser.hpp"
#include "gpsr/text.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr {

using nlohmann::json;

namespace {

constexpr std::string_view kCommandMarker = "Command: ";
constexpr std::string_view kAnswerMarker = "Answer:";
constexpr std::string_view kQuestionMarker = "Question: ";

std::string render_example(const FewShotExample& ex) {
  std::string out = std::string(kCommandMarker) + ex.command_text + "\n";
  if (ex.note) out += "Note: " + *ex.note + "\n";
  out += std::string(kAnswerMarker) + " " + render(ex.gold_plan);
  return out;
}

std::string list_line(std::string_view label, const std::vector<std::string>& names) {
  return std::string(label) + ": " + text::join(names, ", ");
}

template <typename Map>
std::vector<std::string> keys(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, _] : m) out.push_back(k);
  return out;
}

}  // namespace

std::string_view corrective_suffix(FailureKind kind) {
  return kind == FailureKind::format_deviation ? kFormatCorrection : kSubtaskCorrection;
}

PromptBank PromptBank::from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema", 0) != 1) {
    throw SchemaError("prompt bank must be an object declaring schema: 1");
  }
  PromptBank bank;
  try {
    const auto& decl = doc.at("declarations");
    bank.declarations_header_ = decl.at("header").get<std::string>();
    const auto& lines = decl.at("lines");
    for (const auto& sig : registry()) {
      auto it = lines.find(std::string(sig.surface_name));
      if (it == lines.end()) {
        throw SchemaError("prompt bank declares no line for '" + std::string(sig.surface_name) + "'");
      }
      bank.declarations_.push_back(it->get<std::string>());
    }
    if (lines.size() != registry().size()) {
      throw SchemaError("prompt bank declares actions outside the primitive set");
    }
    bank.requirements_ = doc.at("requirements").get<std::string>();
    for (const auto& ex : doc.at("examples")) {
      auto outcome = parse(ex.at("plan").get<std::string>());
      if (!outcome.parsed()) {
        throw SchemaError("example '" + ex.at("command").get<std::string>() +
                          "' has an unparseable plan: " + outcome.failure().detail);
      }
      FewShotExample fs{ex.at("command").get<std::string>(), outcome.plan(), std::nullopt};
      if (auto n = ex.find("note"); n != ex.end() && !n->is_null()) fs.note = n->get<std::string>();
      bank.examples_.push_back(std::move(fs));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed prompt bank: ") + e.what());
  }
  return bank;
}

PromptBank PromptBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompt bank " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("prompt bank " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::string PromptBundle::render() const {
  std::vector<std::string> blocks;
  for (const auto* b : {&declarations_block, &entities_block, &examples_block, &requirements_block,
                        &task_block}) {
    if (!b->empty()) blocks.push_back(*b);
  }
  return text::join(blocks, "\n\n");
}

PromptBundle build_prompt(std::string_view command_text, const WorldModel& world,
                          const PromptBank& bank, const PromptConfig& config) {
  if (bank.examples().empty()) throw InvalidInput("prompt bank has no examples");
  if (text::trim(command_text).empty()) throw InvalidInput("command must not be empty");

  PromptBundle b;
  std::vector<std::string> decl{bank.declarations_header()};
  decl.insert(decl.end(), bank.declarations().begin(), bank.declarations().end());
  b.declarations_block = text::join(decl, "\n");
  for (const auto& sig : registry()) {
    if (text::count_occurrences(b.declarations_block, sig.surface_name) != 1) {
      throw SchemaError("declarations must name '" + std::string(sig.surface_name) +
                        "' exactly once");
    }
  }

  std::vector<std::string> persons;
  for (const auto& [name, _] : world.persons()) persons.push_back(name);
  b.entities_block = text::join({list_line("Available objects", keys(world.objects())),
                                 list_line("Available locations", keys(world.locations())),
                                 list_line("Available persons", persons)},
                                "\n");
  b.requirements_block = bank.requirements();
  b.task_block = std::string(kCommandMarker) + text::trim(command_text) + "\n" +
                 std::string(kAnswerMarker);

  std::size_t used = text::word_count(b.render());
  if (used > config.token_budget) {
    throw BudgetExceeded("fixed prompt blocks need " + std::to_string(used) +
                         " words, budget is " + std::to_string(config.token_budget));
  }

  const std::string header = "Examples:";
  std::vector<std::string> rendered{header};
  used += text::word_count(header);
  for (const auto& ex : bank.examples()) {
    std::string r = render_example(ex);
    std::size_t w = text::word_count(r);
    if (used + w > config.token_budget) break;
    used += w;
    rendered.push_back(std::move(r));
  }
  b.examples_included = rendered.size() - 1;
  if (b.examples_included > 0) b.examples_block = text::join(rendered, "\n\n");
  return b;
}

PromptBundle build_answer_prompt(std::string_view question, const PromptConfig&) {
  std::string q = text::trim(question);
  if (q.empty()) throw InvalidInput("question must not be empty");
  PromptBundle b;
  b.requirements_block = std::string(kAnswerInstruction);
  b.task_block = std::string(kQuestionMarker) + q;
  return b;
}

std::string command_of_prompt(std::string_view prompt) {
  auto pos = prompt.rfind(kCommandMarker);
  if (pos == std::string_view::npos) return {};
  pos += kCommandMarker.size();
  auto end = prompt.find('\n', pos);
  return text::trim(prompt.substr(pos, end == std::string_view::npos ? end : end - pos));
}

bool is_answer_prompt(std::string_view prompt) { return prompt.starts_with(kAnswerInstruction); }

std::string question_of_prompt(std::string_view prompt) {
  auto pos = prompt.rfind(kQuestionMarker);
  if (pos == std::string_view::npos) return {};
  return text::trim(prompt.substr(pos + kQuestionMarker.size()));
}

}  // namespace gpsr
