#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fluentnet/store.hpp"

namespace fluentnet {

enum class SensorKind { Motion, Item, Phone, Door, Flow };

const char* to_string(SensorKind k);

/// Kind tag carried by every contextualized raw statement.
std::string kind_tag(SensorKind k);

/// Kind encoded in a sensor id's letter prefix (M7, I3, D11, ...).
/// Ids outside the recognized families (temperature, brightness, battery
/// telemetry, ...) map to nothing and get skipped by ingestion.
std::optional<SensorKind> kind_of_sensor(const std::string& id);

/// Static description of the monitored flat: rooms, furniture placed in
/// rooms, and sensors attached either to a piece of furniture / room they are
/// near, or directly to the room that contains them.
struct Topology {
  std::set<std::string> rooms;
  std::map<std::string, std::string> furniture;        // name -> room
  std::map<std::string, SensorKind> sensors;           // id -> kind
  std::map<std::string, std::set<std::string>> near;   // sensor -> places
  std::map<std::string, std::string> located_in;       // sensor -> room

  bool knows_sensor(const std::string& id) const { return sensors.count(id) > 0; }

  /// Rooms reachable from a sensor: located_in directly, plus the rooms of
  /// every place the sensor is near.
  std::set<std::string> rooms_of(const std::string& sensor) const;

  /// Location-belief statement names this topology can produce: one
  /// "near<Place>" per near-target, one "in<Room>" per reachable room.
  std::set<std::string> location_names() const;
};

/// Loads the line-oriented topology format:
///   room <name>
///   furniture <name> in <room>
///   sensor <id> kind <M|I|P|D|F> near <place> [<place> ...]
///   sensor <id> kind <M|I|P|D|F> in <room>
/// '#' starts a comment. Every referenced place must be declared first; a
/// sensor without a placement, an empty file, or an unknown symbol is an
/// error.
Topology load_topology(const std::string& text);

/// Statement name / classification tag for a location belief.
std::string near_name(const std::string& place);
std::string in_name(const std::string& room);
std::string near_tag(const std::string& place);
std::string in_tag(const std::string& room);

/// Expands one raw sensor statement into the statements a placing node
/// ingests: the raw statement tagged with its kind, then location beliefs
/// ("near<Place>", "in<Room>", each tagged Near<Place>/In<Room>) for every
/// place the event puts the person at. Motion-off events carry no location
/// (motion ceasing does not witness presence); every other event localizes
/// the person at the sensor's places at the statement time.
std::vector<Statement> contextualize(const Topology& topology,
                                     const Statement& raw);

/// Upper bound on a placing node's complexity metric over any event stream:
/// every possible statement name with the tags it can accrue from
/// contextualization plus the node's own tag rules.
std::size_t placing_complexity_bound(const Topology& topology,
                                     const std::vector<TagRule>& tag_rules);

}  // namespace fluentnet
