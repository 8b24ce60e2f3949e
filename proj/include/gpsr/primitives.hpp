#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpsr {

class WorldModel;

// The closed vocabulary of executable robot behaviours.
enum class PrimitiveKind { move_to, look_for_obj, look_for_person, follow, grasp, pass_to, speak, answer };

enum class ArgRole { location, object, person_descriptor, person_or_object, utterance, topic };

struct PrimitiveSignature {
  PrimitiveKind kind;
  std::string_view surface_name;
  ArgRole arg_role;
  int arity = 1;
};

// All eight signatures, in declaration order ("move to" first).
const std::array<PrimitiveSignature, 8>& registry();

const PrimitiveSignature& signature(PrimitiveKind kind);
std::string_view surface_name(PrimitiveKind kind);

// Case-insensitive; internal whitespace is collapsed and '_' counts as a space.
std::optional<PrimitiveSignature> lookup(std::string_view name);

// The two ways a model answer can be rejected. Each has its own corrective
// re-prompt.
enum class FailureKind { format_deviation, unknown_action };

std::string_view to_string(FailureKind kind);

struct ActionStep {
  PrimitiveKind kind;
  std::string argument;

  ActionStep(PrimitiveKind k, std::string arg);

  bool operator==(const ActionStep&) const = default;
};

struct Plan {
  std::vector<ActionStep> steps;

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  bool operator==(const Plan&) const = default;
};

enum class Verdict { valid, unknown_action, arity_error, precondition_order_violation };

std::string_view to_string(Verdict v);

struct ValidationReport {
  Verdict verdict = Verdict::valid;
  std::optional<std::size_t> offending_index;
  std::string detail;

  bool valid() const { return verdict == Verdict::valid; }
};

// Argument identity used for matching steps: the canonical entity name when
// the argument resolves in the world, the normalized text otherwise.
std::string argument_key(const WorldModel& world, std::string_view argument);

/// Checks a parsed plan before execution. Checks run in order and the first
/// violation wins: vocabulary, arity, then ordering rules:
///   grasp X        needs an earlier look_for_obj X
///   pass_to        needs an earlier grasp
///   follow/answer  need an earlier look_for_person
ValidationReport validate_static(const Plan& plan, const WorldModel& world);

}  // namespace gpsr
