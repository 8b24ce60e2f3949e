#include "gpsr/command_grammar.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "gpsr/errors.hpp"
#include "gpsr/plan_parser.hpp"
#include "gpsr/text.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr {

using nlohmann::json;

std::string_view to_string(CommandCategory c) {
  switch (c) {
    case CommandCategory::TypeA: return "A";
    case CommandCategory::TypeB: return "B";
    case CommandCategory::TypeC: return "C";
  }
  return "A";
}

std::optional<CommandCategory> parse_category(std::string_view s) {
  for (CommandCategory c : kAllCategories) {
    if (s == to_string(c) || s == "Type" + std::string(to_string(c))) return c;
  }
  return std::nullopt;
}

namespace {

std::optional<SlotType> parse_slot_type(std::string_view s) {
  static const std::map<std::string_view, SlotType> kTypes{
      {"room", SlotType::room},
      {"location", SlotType::location},
      {"object", SlotType::object},
      {"person", SlotType::person},
      {"gesture_person", SlotType::gesture_person},
      {"gendered_person", SlotType::gendered_person},
      {"question", SlotType::question},
      {"utterance", SlotType::utterance},
  };
  auto it = kTypes.find(s);
  if (it == kTypes.end()) return std::nullopt;
  return it->second;
}

bool person_like(SlotType t) {
  return t == SlotType::person || t == SlotType::gesture_person || t == SlotType::gendered_person;
}

struct Placeholder {
  std::size_t begin;
  std::size_t end;
  std::string slot;
  std::string attribute;
};

std::vector<Placeholder> placeholders(std::string_view pattern) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    auto close = pattern.find('}', pos);
    if (close == std::string_view::npos) throw SchemaError("unclosed slot in '" + std::string(pattern) + "'");
    std::string inner(pattern.substr(pos + 1, close - pos - 1));
    auto dot = inner.find('.');
    Placeholder p{pos, close + 1, inner.substr(0, dot), dot == std::string::npos ? "" : inner.substr(dot + 1)};
    out.push_back(std::move(p));
    pos = close + 1;
  }
  return out;
}

std::string_view gesture_surface(Gesture g) {
  switch (g) {
    case Gesture::pointing_left: return "pointing to the left";
    case Gesture::pointing_right: return "pointing to the right";
    case Gesture::raising_hand: return "raising a hand";
    case Gesture::none: return "standing";
  }
  return "standing";
}

std::string_view gesture_argument(Gesture g) {
  switch (g) {
    case Gesture::pointing_left: return "point to the left";
    case Gesture::pointing_right: return "point to the right";
    case Gesture::raising_hand: return "raise a hand";
    case Gesture::none: return "person";
  }
  return "person";
}

using Bindings = std::map<std::string, std::string>;

SlotType slot_type(const Template& t, const std::string& slot) {
  for (const auto& [name, type] : t.slots) {
    if (name == slot) return type;
  }
  throw SchemaError("template '" + t.id + "' uses undeclared slot '" + slot + "'");
}

class Binder {
 public:
  Binder(const Template& t, const WorldModel& world) : t_(t), world_(world) {}

  std::string attribute(const std::string& slot, const std::string& attr, const Bindings& b) const {
    const std::string& value = b.at(slot);
    SlotType type = type_of(slot);
    if (attr.empty()) return value;
    if (person_like(type)) {
      const PersonProfile& p = *world_.person(value);
      bool f = p.gender == Gender::female;
      bool m = p.gender == Gender::male;
      if (attr == "location") return p.location;
      if (attr == "room") return *world_.room_of(p.location);
      if (attr == "pronoun") return f ? "her" : m ? "him" : "them";
      if (attr == "possessive") return f ? "her" : m ? "his" : "their";
      if (attr == "gesture") return std::string(gesture_surface(p.gesture.value_or(Gesture::none)));
      if (attr == "gesture_arg") return std::string(gesture_argument(p.gesture.value_or(Gesture::none)));
      if (attr == "gender_noun") return f ? "woman" : m ? "man" : "person";
      if (attr == "gender_arg") return f ? "female person" : m ? "male person" : "person";
    } else if (type == SlotType::object) {
      const std::string& loc = world_.objects().at(value);
      if (attr == "location") return loc;
      if (attr == "room") return *world_.room_of(loc);
      if (attr == "article") return std::string(std::strchr("aeiou", std::tolower(value.front())) ? "an" : "a");
    } else if (type == SlotType::location) {
      if (attr == "room") return *world_.room_of(value);
    }
    throw SchemaError("template '" + t_.id + "': slot '" + slot + "' has no attribute '" + attr + "'");
  }

  std::string fill(std::string_view pattern, const Bindings& b) const {
    std::string out;
    std::size_t last = 0;
    for (const auto& p : placeholders(pattern)) {
      out.append(pattern.substr(last, p.begin - last));
      out += attribute(p.slot, p.attribute, b);
      last = p.end;
    }
    out.append(pattern.substr(last));
    return out;
  }

  json fill_json(const json& j, const Bindings& b) const {
    if (j.is_string()) return fill(j.get<std::string>(), b);
    if (j.is_array() || j.is_object()) {
      json out = j;
      for (auto& [key, value] : out.items()) value = fill_json(value, b);
      return out;
    }
    return j;
  }

  Command instantiate(const Bindings& b) const {
    Command c;
    c.text = fill(t_.surface_pattern, b);
    c.category = t_.category;
    c.template_id = t_.id;
    for (const auto& [kind, arg] : t_.plan_pattern) c.gold_plan.steps.emplace_back(kind, fill(arg, b));
    c.script = InteractionScript::from_json(fill_json(t_.script_pattern, b));
    return c;
  }

  SlotType type_of(const std::string& slot) const { return slot_type(t_, slot); }

 private:
  const Template& t_;
  const WorldModel& world_;
};

std::vector<std::string> candidates(SlotType type, const WorldModel& world, const TemplateBank& bank) {
  std::vector<std::string> out;
  switch (type) {
    case SlotType::room:
      out = world.rooms();
      break;
    case SlotType::location: {
      std::set<std::string> rooms(world.rooms().begin(), world.rooms().end());
      for (const auto& [name, _] : world.locations()) {
        if (!rooms.contains(name) && name != kInitialLocation) out.push_back(name);
      }
      break;
    }
    case SlotType::object:
      for (const auto& [name, _] : world.objects()) out.push_back(name);
      break;
    case SlotType::person:
    case SlotType::gesture_person:
    case SlotType::gendered_person:
      for (const auto& [name, p] : world.persons()) {
        if (type == SlotType::gesture_person && p.gesture.value_or(Gesture::none) == Gesture::none) continue;
        if (type == SlotType::gendered_person && p.gender == Gender::unspecified) continue;
        out.push_back(name);
      }
      break;
    case SlotType::question:
      out = bank.questions();
      break;
    case SlotType::utterance:
      out = bank.utterances();
      break;
  }
  return out;
}

// Lower-case alphanumerics and single spaces; punctuation is ignored when
// matching command texts.
std::string match_key(std::string_view s) {
  std::string cleaned;
  for (char c : s) cleaned.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : ' ');
  return text::normalize(cleaned);
}

void check_category_purity(const Template& t) {
  auto has = [&](PrimitiveKind k) {
    for (const auto& [kind, _] : t.plan_pattern) {
      if (kind == k) return true;
    }
    return false;
  };
  bool ok = true;
  switch (t.category) {
    case CommandCategory::TypeA:
      ok = !has(PrimitiveKind::grasp) && !has(PrimitiveKind::pass_to) && !has(PrimitiveKind::answer);
      break;
    case CommandCategory::TypeB:
      ok = has(PrimitiveKind::look_for_obj);
      break;
    case CommandCategory::TypeC:
      ok = has(PrimitiveKind::speak) || has(PrimitiveKind::answer);
      break;
  }
  if (!ok) throw SchemaError("template '" + t.id + "' does not fit category " + std::string(to_string(t.category)));
}

}  // namespace

// --- Command / Suite serialization ---------------------------------------------

json Command::to_json() const {
  return {{"text", text},   {"category", to_string(category)}, {"gold_plan", render(gold_plan)},
          {"seed", seed},   {"template", template_id},         {"script", script.to_json()}};
}

Command Command::from_json(const json& j) {
  Command c;
  try {
    c.text = j.at("text").get<std::string>();
    auto cat = parse_category(j.at("category").get<std::string>());
    if (!cat) throw SchemaError("unknown command category");
    c.category = *cat;
    auto outcome = parse(j.at("gold_plan").get<std::string>());
    if (!outcome.parsed()) throw SchemaError("gold plan of '" + c.text + "' does not parse");
    c.gold_plan = outcome.plan();
    c.seed = j.value("seed", std::uint64_t{0});
    c.template_id = j.value("template", std::string());
    c.script = InteractionScript::from_json(j.value("script", json::object()));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed command record: ") + e.what());
  }
  return c;
}

json Suite::to_json() const {
  json cnt = json::object();
  for (const auto& [c, n] : counts) cnt[std::string(to_string(c))] = n;
  json cmds = json::array();
  for (const auto& c : commands) cmds.push_back(c.to_json());
  return {{"schema", 1}, {"seed", seed}, {"counts", cnt}, {"commands", cmds}};
}

Suite Suite::from_json(const json& j) {
  Suite s;
  try {
    if (j.value("schema", 0) != 1) throw SchemaError("suite must declare schema: 1");
    s.seed = j.value("seed", std::uint64_t{0});
    const json counts = j.value("counts", json::object());
    for (const auto& [k, v] : counts.items()) {
      auto c = parse_category(k);
      if (!c) throw SchemaError("unknown category '" + k + "' in suite counts");
      s.counts[*c] = v.get<int>();
    }
    for (const auto& c : j.at("commands")) s.commands.push_back(Command::from_json(c));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed suite: ") + e.what());
  }
  return s;
}

void Suite::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write suite " + path.string());
  out << to_json().dump(2) << "\n";
}

Suite Suite::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open suite " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("suite " + path.string() + " is not valid JSON: " + e.what());
  }
}

// --- TemplateBank ----------------------------------------------------------------

TemplateBank TemplateBank::from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema", 0) != 1) {
    throw SchemaError("template bank must be an object declaring schema: 1");
  }
  TemplateBank bank;
  try {
    bank.questions_ = doc.value("questions", std::vector<std::string>{});
    bank.utterances_ = doc.value("utterances", std::vector<std::string>{});
    std::set<std::string> ids;
    for (const auto& tj : doc.at("templates")) {
      Template t;
      t.id = tj.at("id").get<std::string>();
      if (!ids.insert(t.id).second) throw SchemaError("duplicate template id '" + t.id + "'");
      auto cat = parse_category(tj.at("category").get<std::string>());
      if (!cat) throw SchemaError("template '" + t.id + "' has an unknown category");
      t.category = *cat;
      for (const auto& s : tj.at("slots")) {
        auto type = parse_slot_type(s.at("type").get<std::string>());
        if (!type) throw SchemaError("template '" + t.id + "' has an unknown slot type");
        t.slots.emplace_back(s.at("name").get<std::string>(), *type);
      }
      t.surface_pattern = tj.at("surface").get<std::string>();
      for (const auto& step : tj.at("plan")) {
        auto sig = lookup(step.at(0).get<std::string>());
        if (!sig) throw SchemaError("template '" + t.id + "' uses unknown action " + step.at(0).dump());
        t.plan_pattern.emplace_back(sig->kind, step.at(1).get<std::string>());
      }
      t.script_pattern = tj.value("script", json::object());

      // Plan slots must be mentioned by the command text.
      std::set<std::string> in_surface;
      for (const auto& p : placeholders(t.surface_pattern)) in_surface.insert(p.slot);
      for (const auto& slot : in_surface) slot_type(t, slot);
      for (const auto& [_, arg] : t.plan_pattern) {
        for (const auto& p : placeholders(arg)) {
          slot_type(t, p.slot);
          if (!in_surface.contains(p.slot)) {
            throw SchemaError("template '" + t.id + "': plan slot '" + p.slot + "' is not in the command text");
          }
        }
      }
      check_category_purity(t);
      bank.templates_.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed template bank: ") + e.what());
  }
  return bank;
}

TemplateBank TemplateBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template bank " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("template bank " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::optional<Command> TemplateBank::match(std::string_view textual, const WorldModel& world) const {
  const std::string key = match_key(textual);
  for (const auto& t : templates_) {
    Binder binder(t, world);
    std::string prefix = match_key(t.surface_pattern.substr(0, t.surface_pattern.find('{')));
    if (!key.starts_with(prefix)) continue;

    std::vector<std::vector<std::string>> cands;
    for (const auto& [_, type] : t.slots) cands.push_back(candidates(type, world, *this));

    std::optional<Command> found;
    Bindings b;
    std::function<void(std::size_t)> bind = [&](std::size_t i) {
      if (found) return;
      if (i == t.slots.size()) {
        if (match_key(binder.fill(t.surface_pattern, b)) == key) found = binder.instantiate(b);
        return;
      }
      for (const auto& v : cands[i]) {
        bool taken = false;
        for (std::size_t k = 0; k < i; ++k) taken = taken || (t.slots[k].second == t.slots[i].second && b[t.slots[k].first] == v);
        if (taken) continue;
        b[t.slots[i].first] = v;
        bind(i + 1);
      }
      b.erase(t.slots[i].first);
    };
    bind(0);
    if (found) return found;
  }
  return std::nullopt;
}

// --- generation --------------------------------------------------------------------

Command generate(std::uint64_t seed, CommandCategory category, const WorldModel& world, const TemplateBank& bank) {
  std::vector<const Template*> pool;
  for (const auto& t : bank.templates()) {
    if (t.category == category) pool.push_back(&t);
  }
  if (pool.empty()) throw EmptyBank("no template for category " + std::string(to_string(category)));

  // Plain modulo keeps the draw identical across standard libraries.
  std::mt19937_64 rng(seed);
  const Template& t = *pool[rng() % pool.size()];

  Bindings b;
  for (std::size_t i = 0; i < t.slots.size(); ++i) {
    const auto& [name, type] = t.slots[i];
    auto cands = candidates(type, world, bank);
    if (cands.empty()) throw EmptyBank("world offers no value for slot '" + name + "' of template '" + t.id + "'");
    std::size_t pick = rng() % cands.size();
    for (std::size_t tries = 0; tries < cands.size(); ++tries) {
      const std::string& v = cands[(pick + tries) % cands.size()];
      bool taken = false;
      for (std::size_t k = 0; k < i; ++k) taken = taken || (t.slots[k].second == type && b[t.slots[k].first] == v);
      if (!taken) {
        pick = (pick + tries) % cands.size();
        break;
      }
    }
    b[name] = cands[pick];
  }
  Command c = Binder(t, world).instantiate(b);
  c.seed = seed;
  return c;
}

std::vector<Command> generate_suite(std::uint64_t seed, const std::map<CommandCategory, int>& counts,
                                    const WorldModel& world, const TemplateBank& bank) {
  std::mt19937_64 seeds(seed);
  std::vector<Command> out;
  for (CommandCategory c : kAllCategories) {
    auto it = counts.find(c);
    int n = it == counts.end() ? 0 : it->second;
    if (n < 0) throw InvalidInput("category counts must be non-negative");
    for (int i = 0; i < n; ++i) out.push_back(generate(seeds(), c, world, bank));
  }
  return out;
}

}  // namespace gpsr
