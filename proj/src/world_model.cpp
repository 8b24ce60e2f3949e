#include "gpsr/world_model.hpp"

#include <fstream>

#include "gpsr/digest.hpp"
#include "gpsr/errors.hpp"
#include "gpsr/text.hpp"

namespace gpsr {

using nlohmann::json;

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::unspecified: return "unspecified";
  }
  return "unspecified";
}

std::string_view to_string(Gesture g) {
  switch (g) {
    case Gesture::pointing_left: return "pointing_left";
    case Gesture::pointing_right: return "pointing_right";
    case Gesture::raising_hand: return "raising_hand";
    case Gesture::none: return "none";
  }
  return "none";
}

namespace {

Gender parse_gender(const std::string& s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "unspecified") return Gender::unspecified;
  throw SchemaError("unknown gender '" + s + "'");
}

Gesture parse_gesture(const std::string& s) {
  for (Gesture g : {Gesture::pointing_left, Gesture::pointing_right, Gesture::raising_hand,
                    Gesture::none}) {
    if (s == to_string(g)) return g;
  }
  throw SchemaError("unknown gesture '" + s + "'");
}

const json& require(const json& doc, const char* key, json::value_t type) {
  auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(std::string("missing section '") + key + "'");
  if (it->type() != type) throw SchemaError(std::string("section '") + key + "' has wrong type");
  return *it;
}

std::string require_name(const json& v, const std::string& where) {
  if (!v.is_string()) throw SchemaError(where + ": expected a string");
  std::string s = text::trim(v.get<std::string>());
  if (s.empty()) throw SchemaError(where + ": empty name");
  return s;
}

}  // namespace

WorldModel WorldModel::from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("world document must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "schema" && key != "rooms" && key != "locations" && key != "objects" &&
        key != "persons" && key != "synonyms") {
      throw SchemaError("unknown section '" + key + "'");
    }
  }
  auto schema = doc.find("schema");
  if (schema == doc.end() || !schema->is_number_integer() || schema->get<int>() != 1) {
    throw SchemaError("world document must declare schema: 1");
  }

  WorldModel w;
  std::map<std::string, std::string> room_by_key;
  for (const auto& r : require(doc, "rooms", json::value_t::array)) {
    std::string name = require_name(r, "rooms");
    if (!room_by_key.emplace(text::normalize(name), name).second) {
      throw SchemaError("duplicate room '" + name + "'");
    }
    w.rooms_.push_back(name);
  }

  std::map<std::string, std::string> location_by_key;
  auto add_location = [&](const std::string& name, const std::string& room) {
    if (!location_by_key.emplace(text::normalize(name), name).second) {
      throw SchemaError("duplicate location '" + name + "'");
    }
    w.locations_.emplace(name, room);
  };
  for (const auto& [name, room_v] : require(doc, "locations", json::value_t::object).items()) {
    std::string room = require_name(room_v, "locations." + name);
    auto it = room_by_key.find(text::normalize(room));
    if (it == room_by_key.end()) {
      throw ReferenceError("location '" + name + "' refers to unknown room '" + room + "'");
    }
    add_location(require_name(json(name), "locations"), it->second);
  }
  for (const auto& room : w.rooms_) {
    auto it = location_by_key.find(text::normalize(room));
    if (it == location_by_key.end()) {
      add_location(room, room);
    } else if (w.locations_.at(it->second) != room) {
      throw SchemaError("location '" + it->second + "' shadows room '" + room + "'");
    }
  }
  if (!location_by_key.contains(std::string(kInitialLocation))) {
    if (w.rooms_.empty()) {
      throw ReferenceError("world has no room to hold the initial location");
    }
    add_location(std::string(kInitialLocation), w.rooms_.front());
  }

  auto canonical_location = [&](const json& v, const std::string& where) {
    std::string loc = require_name(v, where);
    auto it = location_by_key.find(text::normalize(loc));
    if (it == location_by_key.end()) {
      throw ReferenceError(where + " refers to unknown location '" + loc + "'");
    }
    return it->second;
  };

  if (auto it = doc.find("objects"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("section 'objects' has wrong type");
    for (const auto& [name, loc] : it->items()) {
      w.objects_.emplace(require_name(json(name), "objects"),
                         canonical_location(loc, "object '" + name + "'"));
    }
  }

  if (auto it = doc.find("persons"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("section 'persons' has wrong type");
    for (const auto& [name, p] : it->items()) {
      if (!p.is_object()) throw SchemaError("person '" + name + "' must be an object");
      PersonProfile profile;
      profile.name = require_name(json(name), "persons");
      profile.gender = parse_gender(p.value("gender", std::string("unspecified")));
      if (auto g = p.find("gesture"); g != p.end() && !g->is_null()) {
        if (!g->is_string()) throw SchemaError("person '" + name + "': gesture must be a string");
        profile.gesture = parse_gesture(g->get<std::string>());
      }
      auto loc = p.find("location");
      if (loc == p.end()) throw SchemaError("person '" + name + "' has no location");
      profile.location = canonical_location(*loc, "person '" + name + "'");
      w.persons_.emplace(profile.name, std::move(profile));
    }
  }

  if (auto it = doc.find("synonyms"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("section 'synonyms' has wrong type");
    for (const auto& [surface, target] : it->items()) {
      w.synonyms_.emplace(require_name(json(surface), "synonyms"),
                          require_name(target, "synonyms." + surface));
    }
  }

  w.build_index();
  return w;
}

void WorldModel::build_index() {
  index_.clear();
  auto add = [&](const std::string& name, EntityKind kind) {
    auto [it, inserted] = index_.emplace(text::normalize(name), ResolvedEntity{kind, name});
    if (!inserted) {
      throw SchemaError("name '" + name + "' is not unique (clashes with '" + it->second.canonical +
                        "')");
    }
  };
  for (const auto& [name, _] : locations_) add(name, EntityKind::location);
  for (const auto& [name, _] : objects_) add(name, EntityKind::object);
  for (const auto& [name, _] : persons_) add(name, EntityKind::person);

  std::map<std::string, ResolvedEntity> aliases;
  for (const auto& [surface, target] : synonyms_) {
    auto key = text::normalize(surface);
    if (index_.contains(key)) {
      throw SchemaError("synonym '" + surface + "' shadows a canonical name");
    }
    auto it = index_.find(text::normalize(target));
    if (it == index_.end()) {
      throw ReferenceError("synonym '" + surface + "' refers to unknown name '" + target + "'");
    }
    if (!aliases.emplace(key, it->second).second) {
      throw SchemaError("duplicate synonym '" + surface + "'");
    }
  }
  index_.merge(aliases);
}

WorldModel WorldModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open world file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("world file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

json WorldModel::to_json() const {
  json doc;
  doc["schema"] = 1;
  doc["rooms"] = rooms_;
  doc["locations"] = locations_;
  doc["objects"] = objects_;
  json persons = json::object();
  for (const auto& [name, p] : persons_) {
    json entry = {{"gender", to_string(p.gender)}, {"location", p.location}};
    if (p.gesture) entry["gesture"] = to_string(*p.gesture);
    persons[name] = entry;
  }
  doc["persons"] = persons;
  doc["synonyms"] = synonyms_;
  return doc;
}

std::string WorldModel::digest() const { return sha256_hex(to_json().dump()); }

ResolvedEntity WorldModel::resolve(std::string_view surface) const {
  auto it = index_.find(text::normalize(surface));
  if (it == index_.end()) return {};
  return it->second;
}

std::optional<std::string> WorldModel::room_of(std::string_view location) const {
  auto it = locations_.find(std::string(location));
  if (it == locations_.end()) return std::nullopt;
  return it->second;
}

const PersonProfile* WorldModel::person(std::string_view canonical) const {
  auto it = persons_.find(std::string(canonical));
  return it == persons_.end() ? nullptr : &it->second;
}

bool WorldModel::operator==(const WorldModel& other) const {
  return rooms_ == other.rooms_ && locations_ == other.locations_ && objects_ == other.objects_ &&
         persons_ == other.persons_ && synonyms_ == other.synonyms_;
}

}  // namespace gpsr
