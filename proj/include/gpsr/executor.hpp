#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpsr/planning_loop.hpp"
#include "gpsr/primitives.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr {

// ---------------------------------------------------------------------------
// State machine

enum class Terminal { success, failure };

// Next backbone state index, or a terminal.
using Transition = std::variant<std::size_t, Terminal>;

inline constexpr std::string_view kExploreRoom = "EXPLORE_ROOM";
inline constexpr std::string_view kFaceToPerson = "FACE_TO_PERSON";
inline constexpr std::string_view kMoveToPerson = "MOVE_TO_PERSON";

struct MachineState {
  std::string name;  // MOVE_TO, LOOK_FOR_PERSON, ...
  ActionStep step;
  std::size_t step_index = 0;
  // Person search runs EXPLORE_ROOM, FACE_TO_PERSON, MOVE_TO_PERSON in order;
  // empty for every other primitive.
  std::vector<std::string> sub_states;
  Transition on_succeeded;
  Transition on_failed = Terminal::failure;

  bool operator==(const MachineState&) const = default;
};

class StateMachine {
 public:
  const std::vector<MachineState>& states() const { return states_; }
  Transition initial() const;
  bool operator==(const StateMachine&) const = default;

 private:
  friend StateMachine compile_unchecked(const Plan& plan);
  std::vector<MachineState> states_;
};

// One backbone state per step; throws InvalidPlan when validate_static
// rejects the plan.
StateMachine compile(const Plan& plan, const WorldModel& world);

// Same structure without the static check, to watch a rejected plan fail at
// run time.
StateMachine compile_unchecked(const Plan& plan);

// ---------------------------------------------------------------------------
// Scripted human input

enum class GestureSignal { follow, pause, terminate };

struct GestureEvent {
  GestureSignal signal = GestureSignal::follow;
  std::optional<std::string> waypoint;  // where the followed person walks to
};

struct InteractionScript {
  std::optional<std::string> operator_name;  // who "me" is, if a modelled person
  std::vector<std::string> questions;        // consumed by answer, in order
  std::vector<GestureEvent> gestures;        // consumed by follow, in order
  std::size_t follow_step_bound = 100;

  nlohmann::json to_json() const;
  static InteractionScript from_json(const nlohmann::json& j);
  static InteractionScript load(const std::filesystem::path& path);
  bool operator==(const InteractionScript&) const;
};

// ---------------------------------------------------------------------------
// Execution

enum class Outcome { succeeded, failed, aborted };

std::string_view to_string(Outcome o);

struct RobotState {
  std::string location;
  std::optional<std::string> holding;
  std::optional<std::string> engaged_person;
  bool following = false;
  std::set<std::string> seen_objects;

  bool operator==(const RobotState&) const = default;
};

RobotState initial_state(const WorldModel& world);

// `precondition` is the ordering class: the robot is not holding anything,
// has not seen the object, or has not engaged a person. Everything else
// depends on the world.
enum class FailureReason {
  precondition,
  unresolved,
  not_found,
  not_colocated,
  no_match,
  hands_full,
  follow_unterminated,
  no_question,
  cannot_answer,
};

std::string_view to_string(FailureReason r);

struct TraceEntry {
  std::string state;
  Outcome outcome = Outcome::succeeded;
  std::vector<std::string> observations;
  std::vector<std::string> utterances;
};

struct ExecutionVerdict {
  bool success = true;
  std::optional<std::size_t> failed_step;
  std::optional<FailureReason> reason;
  std::string detail;
};

struct ExecutionTrace {
  std::vector<TraceEntry> entries;
  ExecutionVerdict verdict;
  RobotState final_state;

  std::vector<std::string> utterances() const;
  nlohmann::json to_json() const;
};

using Answerer = std::function<AnswerResult(std::string_view question)>;

struct RunOptions {
  Answerer answerer;  // answer steps fail with cannot_answer when unset
};

/// Walks the machine from its initial state against a private copy of the
/// world's person and object placements. The first failing state sends the
/// machine to the failure terminal. Deterministic in all inputs.
ExecutionTrace run(const StateMachine& machine, const WorldModel& world, const RobotState& start,
                   const InteractionScript& io, const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Person descriptors ("Jennifer", "female person", "point to the left", "her")

struct PersonDescriptor {
  enum class Kind { named, engaged, operator_person, attributes, invalid };
  Kind kind = Kind::invalid;
  std::string name;
  std::optional<Gender> gender;
  std::optional<Gesture> gesture;
};

PersonDescriptor parse_descriptor(const WorldModel& world, std::string_view text);

}  // namespace gpsr
