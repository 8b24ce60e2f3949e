#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpsr/executor.hpp"
#include "gpsr/primitives.hpp"

namespace gpsr {

class WorldModel;

// A: navigate, find a person, follow. B: find an object and pass it.
// C: speak to or answer someone.
enum class CommandCategory { TypeA, TypeB, TypeC };

inline constexpr CommandCategory kAllCategories[] = {CommandCategory::TypeA, CommandCategory::TypeB,
                                                     CommandCategory::TypeC};

std::string_view to_string(CommandCategory c);  // "A", "B", "C"
std::optional<CommandCategory> parse_category(std::string_view s);

struct Command {
  std::string text;
  CommandCategory category = CommandCategory::TypeA;
  Plan gold_plan;
  std::uint64_t seed = 0;
  std::string template_id;
  InteractionScript script;  // human behaviour under which the gold plan succeeds

  nlohmann::json to_json() const;
  static Command from_json(const nlohmann::json& j);
};

enum class SlotType { room, location, object, person, gesture_person, gendered_person, question, utterance };

/// Surface and plan patterns share "{slot}" / "{slot.attribute}" references.
/// Person-like slots offer location, room, pronoun, possessive, gesture,
/// gesture_arg, gender_noun and gender_arg; objects offer location, room
/// and article; locations offer room.
struct Template {
  std::string id;
  CommandCategory category = CommandCategory::TypeA;
  std::vector<std::pair<std::string, SlotType>> slots;  // binding order
  std::string surface_pattern;
  std::vector<std::pair<PrimitiveKind, std::string>> plan_pattern;
  nlohmann::json script_pattern = nlohmann::json::object();
};

class TemplateBank {
 public:
  static TemplateBank from_json(const nlohmann::json& doc);
  static TemplateBank load(const std::filesystem::path& path);

  const std::vector<Template>& templates() const { return templates_; }
  const std::vector<std::string>& questions() const { return questions_; }
  const std::vector<std::string>& utterances() const { return utterances_; }

  // Gold plan of a command text the bank can produce in this world, found by
  // enumerating every template binding.
  std::optional<Command> match(std::string_view text, const WorldModel& world) const;

 private:
  std::vector<Template> templates_;
  std::vector<std::string> questions_;
  std::vector<std::string> utterances_;
};

// Deterministic for fixed (seed, category, world, bank). Throws EmptyBank
// when the bank has no template of the category.
Command generate(std::uint64_t seed, CommandCategory category, const WorldModel& world, const TemplateBank& bank);

// Categories in A, B, C order; per-command seeds are drawn from `seed`.
std::vector<Command> generate_suite(std::uint64_t seed, const std::map<CommandCategory, int>& counts,
                                    const WorldModel& world, const TemplateBank& bank);

struct Suite {
  std::uint64_t seed = 0;
  std::map<CommandCategory, int> counts;
  std::vector<Command> commands;

  nlohmann::json to_json() const;
  static Suite from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Suite load(const std::filesystem::path& path);
};

}  // namespace gpsr
