#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace gpsr {

inline constexpr std::string_view kInitialLocation = "initial location";

enum class Gender { female, male, unspecified };
enum class Gesture { pointing_left, pointing_right, raising_hand, none };

std::string_view to_string(Gender g);
std::string_view to_string(Gesture g);

struct PersonProfile {
  std::string name;
  Gender gender = Gender::unspecified;
  std::optional<Gesture> gesture;
  std::string location;

  bool operator==(const PersonProfile&) const = default;
};

enum class EntityKind { object, location, person, unresolved };

struct ResolvedEntity {
  EntityKind kind = EntityKind::unresolved;
  std::string canonical;  // empty when unresolved

  bool resolved() const { return kind != EntityKind::unresolved; }
  bool operator==(const ResolvedEntity&) const = default;
};

/// Environment knowledge base: rooms, named locations (furniture, room
/// centres and the distinguished "initial location"), objects placed at
/// locations, persons and a one-step synonym table.
///
/// Immutable once loaded. Every room is also a navigable location of the
/// same name, and "initial location" is added in the first listed room when
/// the document omits it.
class WorldModel {
 public:
  static WorldModel from_json(const nlohmann::json& doc);
  static WorldModel load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  // SHA-256 of the canonical JSON serialization.
  std::string digest() const;

  ResolvedEntity resolve(std::string_view surface) const;

  const std::vector<std::string>& rooms() const { return rooms_; }
  const std::map<std::string, std::string>& locations() const { return locations_; }
  const std::map<std::string, std::string>& objects() const { return objects_; }
  const std::map<std::string, PersonProfile>& persons() const { return persons_; }
  const std::map<std::string, std::string>& synonyms() const { return synonyms_; }

  // Room containing a canonical location name.
  std::optional<std::string> room_of(std::string_view location) const;
  const PersonProfile* person(std::string_view canonical) const;

  bool operator==(const WorldModel& other) const;

 private:
  WorldModel() = default;
  void build_index();

  std::vector<std::string> rooms_;
  std::map<std::string, std::string> locations_;
  std::map<std::string, std::string> objects_;
  std::map<std::string, PersonProfile> persons_;
  std::map<std::string, std::string> synonyms_;

  // normalized name -> (kind, canonical); synonyms folded in.
  std::map<std::string, ResolvedEntity> index_;
};

}  // namespace gpsr
