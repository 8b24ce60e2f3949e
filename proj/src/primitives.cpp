#include "gpsr/primitives.hpp"

#include <algorithm>

#include "gpsr/errors.hpp"
#include "gpsr/text.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr {

const std::array<PrimitiveSignature, 8>& registry() {
  static constexpr std::array<PrimitiveSignature, 8> kRegistry{{
      {PrimitiveKind::move_to, "move to", ArgRole::location, 1},
      {PrimitiveKind::look_for_obj, "look for obj", ArgRole::object, 1},
      {PrimitiveKind::look_for_person, "look for person", ArgRole::person_descriptor, 1},
      {PrimitiveKind::follow, "follow", ArgRole::person_descriptor, 1},
      {PrimitiveKind::grasp, "grasp", ArgRole::object, 1},
      {PrimitiveKind::pass_to, "pass to", ArgRole::person_or_object, 1},
      {PrimitiveKind::speak, "speak", ArgRole::utterance, 1},
      {PrimitiveKind::answer, "answer", ArgRole::topic, 1},
  }};
  return kRegistry;
}

const PrimitiveSignature& signature(PrimitiveKind kind) {
  return registry()[static_cast<std::size_t>(kind)];
}

std::string_view surface_name(PrimitiveKind kind) { return signature(kind).surface_name; }

std::optional<PrimitiveSignature> lookup(std::string_view name) {
  std::string key = text::normalize(text::replace_all(std::string(name), "_", " "));
  for (const auto& sig : registry()) {
    if (sig.surface_name == key) return sig;
  }
  return std::nullopt;
}

std::string_view to_string(FailureKind kind) {
  return kind == FailureKind::format_deviation ? "format_deviation" : "unknown_action";
}

ActionStep::ActionStep(PrimitiveKind k, std::string arg) : kind(k), argument(text::trim(arg)) {
  if (argument.empty()) throw InvalidInput("action step argument must not be empty");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::unknown_action: return "unknown_action";
    case Verdict::arity_error: return "arity_error";
    case Verdict::precondition_order_violation: return "precondition_order_violation";
  }
  return "valid";
}

std::string argument_key(const WorldModel& world, std::string_view argument) {
  auto r = world.resolve(argument);
  return r.resolved() ? r.canonical : text::normalize(argument);
}

ValidationReport validate_static(const Plan& plan, const WorldModel& world) {
  const auto& steps = plan.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto k = static_cast<std::size_t>(steps[i].kind);
    if (k >= registry().size()) {
      return {Verdict::unknown_action, i, "step " + std::to_string(i) + " is not a primitive"};
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (text::trim(steps[i].argument).empty()) {
      return {Verdict::arity_error, i, "step " + std::to_string(i) + " has no argument"};
    }
  }

  std::vector<std::string> looked_for;
  bool grasped = false;
  bool person_found = false;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    auto violation = [&](std::string why) {
      return ValidationReport{Verdict::precondition_order_violation, i,
                              "step " + std::to_string(i) + " (" + std::string(surface_name(s.kind)) +
                                  ", " + s.argument + "): " + std::move(why)};
    };
    switch (s.kind) {
      case PrimitiveKind::look_for_obj:
        looked_for.push_back(argument_key(world, s.argument));
        break;
      case PrimitiveKind::grasp:
        if (std::find(looked_for.begin(), looked_for.end(), argument_key(world, s.argument)) ==
            looked_for.end()) {
          return violation("grasp without an earlier look for obj on the same object");
        }
        grasped = true;
        break;
      case PrimitiveKind::pass_to:
        if (!grasped) return violation("pass to without an earlier grasp");
        break;
      case PrimitiveKind::look_for_person:
        person_found = true;
        break;
      case PrimitiveKind::follow:
        if (!person_found) return violation("follow without an earlier look for person");
        break;
      case PrimitiveKind::answer:
        if (!person_found) return violation("answer without an earlier look for person");
        break;
      case PrimitiveKind::move_to:
      case PrimitiveKind::speak:
        break;
    }
  }
  return {};
}

}  // namespace gpsr
