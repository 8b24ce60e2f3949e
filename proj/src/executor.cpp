#include "gpsr/executor.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "gpsr/errors.hpp"
#include "gpsr/text.hpp"

namespace gpsr {

using nlohmann::json;

// --- compile -----------------------------------------------------------------

Transition StateMachine::initial() const {
  if (states_.empty()) return Terminal::success;
  return std::size_t{0};
}

StateMachine compile(const Plan& plan, const WorldModel& world) {
  ValidationReport report = validate_static(plan, world);
  if (!report.valid()) throw InvalidPlan(std::string(to_string(report.verdict)) + ": " + report.detail);
  return compile_unchecked(plan);
}

StateMachine compile_unchecked(const Plan& plan) {
  StateMachine m;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const ActionStep& step = plan.steps[i];
    std::string name = text::replace_all(std::string(surface_name(step.kind)), " ", "_");
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    MachineState s{name, step, i, {}, Terminal::success, Terminal::failure};
    if (step.kind == PrimitiveKind::look_for_person) {
      s.sub_states = {std::string(kExploreRoom), std::string(kFaceToPerson), std::string(kMoveToPerson)};
    }
    if (i + 1 < plan.steps.size()) s.on_succeeded = i + 1;
    m.states_.push_back(std::move(s));
  }
  return m;
}

// --- interaction scripts -------------------------------------------------------

namespace {

std::string_view to_string(GestureSignal g) {
  switch (g) {
    case GestureSignal::follow: return "follow";
    case GestureSignal::pause: return "pause";
    case GestureSignal::terminate: return "terminate";
  }
  return "follow";
}

GestureSignal parse_signal(const std::string& s) {
  if (s == "follow") return GestureSignal::follow;
  if (s == "pause") return GestureSignal::pause;
  if (s == "terminate") return GestureSignal::terminate;
  throw SchemaError("unknown gesture signal '" + s + "'");
}

}  // namespace

json InteractionScript::to_json() const {
  json g = json::array();
  for (const auto& e : gestures) {
    json entry = {{"signal", to_string(e.signal)}};
    if (e.waypoint) entry["to"] = *e.waypoint;
    g.push_back(entry);
  }
  json j = {{"schema", 1}, {"questions", questions}, {"gestures", g}, {"follow_step_bound", follow_step_bound}};
  if (operator_name) j["operator"] = *operator_name;
  return j;
}

InteractionScript InteractionScript::from_json(const json& j) {
  InteractionScript s;
  try {
    if (j.value("schema", 1) != 1) throw SchemaError("interaction script must declare schema: 1");
    if (auto it = j.find("operator"); it != j.end() && !it->is_null()) s.operator_name = it->get<std::string>();
    s.questions = j.value("questions", std::vector<std::string>{});
    for (const auto& e : j.value("gestures", json::array())) {
      GestureEvent ev{parse_signal(e.at("signal").get<std::string>()), std::nullopt};
      if (auto it = e.find("to"); it != e.end() && !it->is_null()) ev.waypoint = it->get<std::string>();
      s.gestures.push_back(std::move(ev));
    }
    s.follow_step_bound = j.value("follow_step_bound", s.follow_step_bound);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed interaction script: ") + e.what());
  }
  return s;
}

InteractionScript InteractionScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open interaction script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("interaction script " + path.string() + " is not valid JSON: " + e.what());
  }
}

bool InteractionScript::operator==(const InteractionScript& o) const { return to_json() == o.to_json(); }

// --- descriptors ---------------------------------------------------------------

namespace {

std::vector<std::string> descriptor_tokens(std::string_view s) {
  std::string cleaned;
  for (char c : s) cleaned.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : ' ');
  return text::words(text::to_lower(cleaned));
}

bool in(const std::string& w, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

}  // namespace

PersonDescriptor parse_descriptor(const WorldModel& world, std::string_view textual) {
  PersonDescriptor d;
  auto resolved = world.resolve(textual);
  if (resolved.kind == EntityKind::person) {
    d.kind = PersonDescriptor::Kind::named;
    d.name = resolved.canonical;
    return d;
  }
  if (resolved.resolved()) return d;  // an object or place, not a person

  auto tokens = descriptor_tokens(textual);
  if (tokens.empty()) return d;
  if (tokens.size() == 1 && in(tokens[0], {"me", "operator", "i", "myself"})) {
    d.kind = PersonDescriptor::Kind::operator_person;
    return d;
  }
  if (tokens.size() == 1 && in(tokens[0], {"her", "him", "them", "she", "he", "they"})) {
    d.kind = PersonDescriptor::Kind::engaged;
    return d;
  }

  bool raise_word = false;
  for (const auto& t : tokens) {
    if (in(t, {"female", "woman", "women", "girl", "lady"})) {
      d.gender = Gender::female;
    } else if (in(t, {"male", "man", "men", "boy", "gentleman"})) {
      d.gender = Gender::male;
    } else if (t == "left") {
      d.gesture = Gesture::pointing_left;
    } else if (t == "right") {
      d.gesture = Gesture::pointing_right;
    } else if (in(t, {"raise", "raising", "raised", "raises", "wave", "waving"})) {
      raise_word = true;
    } else if (in(t, {"person", "someone", "somebody", "anyone", "people", "a", "an", "the", "to",
                      "point", "pointing", "points", "hand", "who", "is", "with", "their", "his",
                      "her", "of", "that"})) {
      // filler
    } else if (auto r = world.resolve(t); r.kind == EntityKind::person && d.name.empty()) {
      d.name = r.canonical;
    } else {
      return PersonDescriptor{};  // unknown qualifier: nobody can be matched
    }
  }
  if (raise_word) {
    if (d.gesture) return PersonDescriptor{};
    d.gesture = Gesture::raising_hand;
  }
  d.kind = d.name.empty() ? PersonDescriptor::Kind::attributes : PersonDescriptor::Kind::named;
  return d;
}

// --- run -----------------------------------------------------------------------

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::succeeded: return "succeeded";
    case Outcome::failed: return "failed";
    case Outcome::aborted: return "aborted";
  }
  return "failed";
}

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::precondition: return "precondition";
    case FailureReason::unresolved: return "unresolved";
    case FailureReason::not_found: return "not_found";
    case FailureReason::not_colocated: return "not_colocated";
    case FailureReason::no_match: return "no_match";
    case FailureReason::hands_full: return "hands_full";
    case FailureReason::follow_unterminated: return "follow_unterminated";
    case FailureReason::no_question: return "no_question";
    case FailureReason::cannot_answer: return "cannot_answer";
  }
  return "precondition";
}

RobotState initial_state(const WorldModel&) { return RobotState{std::string(kInitialLocation), {}, {}, false, {}}; }

std::vector<std::string> ExecutionTrace::utterances() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.insert(out.end(), e.utterances.begin(), e.utterances.end());
  return out;
}

json ExecutionTrace::to_json() const {
  json entries_j = json::array();
  for (const auto& e : entries) {
    entries_j.push_back({{"state", e.state}, {"outcome", gpsr::to_string(e.outcome)},
                         {"observations", e.observations}, {"utterances", e.utterances}});
  }
  json verdict_j = {{"success", verdict.success}, {"detail", verdict.detail}};
  if (verdict.failed_step) verdict_j["failed_step"] = *verdict.failed_step;
  if (verdict.reason) verdict_j["reason"] = gpsr::to_string(*verdict.reason);
  json state_j = {{"location", final_state.location}, {"following", final_state.following},
                  {"seen_objects", final_state.seen_objects}};
  state_j["holding"] = final_state.holding ? json(*final_state.holding) : json();
  state_j["engaged_person"] = final_state.engaged_person ? json(*final_state.engaged_person) : json();
  return {{"entries", entries_j}, {"verdict", verdict_j}, {"final_state", state_j}};
}

namespace {

struct StepFailure {
  FailureReason reason;
  std::string detail;
  Outcome outcome = Outcome::failed;
};

// Mutable episode: robot state plus private copies of where people and
// objects are. The shared WorldModel is never touched.
class Episode {
 public:
  Episode(const WorldModel& world, const RobotState& start, const InteractionScript& io, const RunOptions& options)
      : world_(world), io_(io), options_(options), robot_(start) {
    for (const auto& [name, p] : world.persons()) person_at_[name] = p.location;
    for (const auto& [name, loc] : world.objects()) object_at_[name] = loc;
  }

  ExecutionTrace run(const StateMachine& machine) {
    ExecutionTrace trace;
    Transition current = machine.initial();
    while (const auto* index = std::get_if<std::size_t>(&current)) {
      const MachineState& state = machine.states()[*index];
      auto failure = execute(state, trace);
      if (failure) {
        trace.verdict = {false, state.step_index, failure->reason, state.name + ": " + failure->detail};
        current = state.on_failed;
      } else {
        current = state.on_succeeded;
      }
    }
    trace.final_state = robot_;
    if (std::get<Terminal>(current) == Terminal::success) trace.verdict = ExecutionVerdict{};
    return trace;
  }

 private:
  using Result = std::optional<StepFailure>;

  Result execute(const MachineState& state, ExecutionTrace& trace) {
    if (state.step.kind == PrimitiveKind::look_for_person) return look_for_person(state, trace);
    TraceEntry entry{state.name, Outcome::succeeded, {}, {}};
    Result r = dispatch(state.step, entry);
    if (r) entry.outcome = r->outcome;
    trace.entries.push_back(std::move(entry));
    return r;
  }

  Result dispatch(const ActionStep& step, TraceEntry& entry) {
    const std::string& arg = step.argument;
    switch (step.kind) {
      case PrimitiveKind::move_to: return move_to(arg, entry);
      case PrimitiveKind::look_for_obj: return look_for_obj(arg, entry);
      case PrimitiveKind::follow: return follow(arg, entry);
      case PrimitiveKind::grasp: return grasp(arg, entry);
      case PrimitiveKind::pass_to: return pass_to(arg, entry);
      case PrimitiveKind::speak:
        entry.utterances.push_back(arg);
        return std::nullopt;
      case PrimitiveKind::answer: return answer(arg, entry);
      case PrimitiveKind::look_for_person: break;
    }
    return StepFailure{FailureReason::unresolved, "unhandled primitive"};
  }

  std::string room_of_robot() const { return *world_.room_of(robot_.location); }

  std::optional<std::string> room_of_person(const std::string& name) const {
    return world_.room_of(person_at_.at(name));
  }

  Result move_to(const std::string& arg, TraceEntry& entry) {
    auto r = world_.resolve(arg);
    if (r.kind != EntityKind::location) {
      return StepFailure{FailureReason::unresolved, "'" + arg + "' is not a known location"};
    }
    robot_.location = r.canonical;
    entry.observations.push_back("arrived at " + r.canonical);
    return std::nullopt;
  }

  Result look_for_obj(const std::string& arg, TraceEntry& entry) {
    auto r = world_.resolve(arg);
    if (r.kind != EntityKind::object) {
      return StepFailure{FailureReason::unresolved, "'" + arg + "' is not a known object"};
    }
    const auto& at = object_at_.at(r.canonical);
    if (!at || world_.room_of(*at) != room_of_robot()) {
      return StepFailure{FailureReason::not_found, r.canonical + " is not in the " + room_of_robot()};
    }
    robot_.seen_objects.insert(r.canonical);
    entry.observations.push_back("saw " + r.canonical + " at " + *at);
    return std::nullopt;
  }

  Result grasp(const std::string& arg, TraceEntry& entry) {
    if (!robot_.seen_objects.contains(argument_key(world_, arg))) {
      return StepFailure{FailureReason::precondition, "'" + arg + "' has not been looked for"};
    }
    auto r = world_.resolve(arg);
    if (r.kind != EntityKind::object) {
      return StepFailure{FailureReason::unresolved, "'" + arg + "' is not a known object"};
    }
    const auto& at = object_at_.at(r.canonical);
    if (!at) return StepFailure{FailureReason::not_found, r.canonical + " is no longer in place"};
    if (world_.room_of(*at) != room_of_robot()) {
      return StepFailure{FailureReason::not_colocated, r.canonical + " is not within reach"};
    }
    if (robot_.holding) return StepFailure{FailureReason::hands_full, "already holding " + *robot_.holding};
    robot_.holding = r.canonical;
    object_at_[r.canonical].reset();
    entry.observations.push_back("holding " + r.canonical);
    return std::nullopt;
  }

  bool descriptor_matches(const PersonDescriptor& d, const std::string& person) const {
    const PersonProfile* p = world_.person(person);
    switch (d.kind) {
      case PersonDescriptor::Kind::named:
        if (d.name != person) return false;
        break;
      case PersonDescriptor::Kind::engaged:
        return robot_.engaged_person == person;
      case PersonDescriptor::Kind::operator_person:
        return io_.operator_name == person;
      case PersonDescriptor::Kind::attributes:
        break;
      case PersonDescriptor::Kind::invalid:
        return false;
    }
    if (d.gender && p->gender != *d.gender) return false;
    if (d.gesture && p->gesture != *d.gesture) return false;
    return true;
  }

  Result look_for_person(const MachineState& state, ExecutionTrace& trace) {
    PersonDescriptor d = parse_descriptor(world_, state.step.argument);
    const std::string room = room_of_robot();
    auto sub = [&](std::string_view name) { return state.name + "/" + std::string(name); };
    auto fail = [&](std::string_view sub_name, StepFailure f) -> Result {
      trace.entries.push_back({sub(sub_name), Outcome::failed, {f.detail}, {}});
      trace.entries.push_back({state.name, Outcome::failed, {}, {}});
      return f;
    };

    // EXPLORE_ROOM: who is here, filtered by name and gesture.
    std::vector<std::string> seen;
    for (const auto& [name, _] : world_.persons()) {
      if (room_of_person(name) != room) continue;
      PersonDescriptor without_gender = d;
      without_gender.gender.reset();
      if (descriptor_matches(without_gender, name)) seen.push_back(name);
    }
    if (seen.empty()) {
      return fail(kExploreRoom, {FailureReason::no_match,
                                 "nobody matching '" + state.step.argument + "' in the " + room});
    }
    trace.entries.push_back({sub(kExploreRoom), Outcome::succeeded,
                             {"detected " + text::join(seen, ", ") + " in the " + room}, {}});

    // FACE_TO_PERSON: confirm gender when the descriptor asks for one.
    std::vector<std::string> confirmed;
    for (const auto& name : seen) {
      if (!d.gender || world_.person(name)->gender == *d.gender) confirmed.push_back(name);
    }
    if (confirmed.empty()) {
      return fail(kFaceToPerson, {FailureReason::no_match, "no " + std::string(to_string(*d.gender)) +
                                                              " person among " + text::join(seen, ", ")});
    }
    trace.entries.push_back({sub(kFaceToPerson), Outcome::succeeded, {"facing " + confirmed.front()}, {}});

    // MOVE_TO_PERSON
    const std::string& target = confirmed.front();
    robot_.engaged_person = target;
    robot_.location = person_at_.at(target);
    trace.entries.push_back({sub(kMoveToPerson), Outcome::succeeded,
                             {"in front of " + target + " at " + robot_.location}, {}});
    trace.entries.push_back({state.name, Outcome::succeeded, {}, {}});
    return std::nullopt;
  }

  Result follow(const std::string& arg, TraceEntry& entry) {
    if (!robot_.engaged_person) return StepFailure{FailureReason::precondition, "no person has been located"};
    const std::string person = *robot_.engaged_person;
    if (!descriptor_matches(parse_descriptor(world_, arg), person)) {
      return StepFailure{FailureReason::no_match, "'" + arg + "' does not describe " + person};
    }
    robot_.following = true;
    for (std::size_t steps = 0; steps < io_.follow_step_bound; ++steps) {
      if (gesture_cursor_ >= io_.gestures.size()) {
        robot_.following = false;
        return StepFailure{FailureReason::follow_unterminated, "no terminate gesture from " + person,
                           Outcome::aborted};
      }
      const GestureEvent& ev = io_.gestures[gesture_cursor_++];
      if (ev.waypoint) {
        auto r = world_.resolve(*ev.waypoint);
        if (r.kind != EntityKind::location) {
          robot_.following = false;
          return StepFailure{FailureReason::unresolved, "waypoint '" + *ev.waypoint + "' is not a location"};
        }
        person_at_[person] = r.canonical;
        robot_.location = r.canonical;
        entry.observations.push_back(person + " walked to " + r.canonical);
      }
      if (ev.signal == GestureSignal::pause) entry.observations.push_back(person + " paused");
      if (ev.signal == GestureSignal::terminate) {
        robot_.following = false;
        robot_.location = person_at_.at(person);
        entry.observations.push_back(person + " stopped at " + robot_.location);
        return std::nullopt;
      }
    }
    robot_.following = false;
    return StepFailure{FailureReason::follow_unterminated,
                       "follow exceeded " + std::to_string(io_.follow_step_bound) + " gesture steps",
                       Outcome::aborted};
  }

  Result pass_to(const std::string& arg, TraceEntry& entry) {
    if (!robot_.holding) return StepFailure{FailureReason::precondition, "not holding anything"};
    PersonDescriptor d = parse_descriptor(world_, arg);
    std::string recipient;
    if (d.kind == PersonDescriptor::Kind::operator_person) {
      recipient = io_.operator_name.value_or("operator");
    } else if (robot_.engaged_person && descriptor_matches(d, *robot_.engaged_person)) {
      recipient = *robot_.engaged_person;
    } else {
      for (const auto& [name, _] : world_.persons()) {
        if (room_of_person(name) == room_of_robot() && descriptor_matches(d, name)) {
          recipient = name;
          break;
        }
      }
    }
    if (recipient.empty()) return StepFailure{FailureReason::no_match, "nobody here matches '" + arg + "'"};
    entry.observations.push_back("handed " + *robot_.holding + " to " + recipient);
    robot_.holding.reset();
    return std::nullopt;
  }

  Result answer(const std::string&, TraceEntry& entry) {
    if (!robot_.engaged_person) return StepFailure{FailureReason::precondition, "no person has been located"};
    if (question_cursor_ >= io_.questions.size()) {
      return StepFailure{FailureReason::no_question, *robot_.engaged_person + " asked no question"};
    }
    const std::string& question = io_.questions[question_cursor_++];
    entry.observations.push_back(*robot_.engaged_person + " asked: " + question);
    if (!options_.answerer) return StepFailure{FailureReason::cannot_answer, "no answering backend"};
    AnswerResult a = options_.answerer(question);
    if (!a.answered()) {
      return StepFailure{FailureReason::cannot_answer,
                         "no acceptable answer after " + std::to_string(a.attempts) + " attempts"};
    }
    entry.utterances.push_back(*a.text);
    return std::nullopt;
  }

  const WorldModel& world_;
  const InteractionScript& io_;
  const RunOptions& options_;
  RobotState robot_;
  std::map<std::string, std::string> person_at_;
  std::map<std::string, std::optional<std::string>> object_at_;
  std::size_t gesture_cursor_ = 0;
  std::size_t question_cursor_ = 0;
};

}  // namespace

ExecutionTrace run(const StateMachine& machine, const WorldModel& world, const RobotState& start,
                   const InteractionScript& io, const RunOptions& options) {
  if (!world.room_of(start.location)) throw InvalidInput("start location '" + start.location + "' is not in the world");
  return Episode(world, start, io, options).run(machine);
}

}  // namespace gpsr
