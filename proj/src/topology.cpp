#include "fluentnet/topology.hpp"

#include <cctype>
#include <sstream>

#include "fluentnet/model_parser.hpp"

namespace fluentnet {

const char* to_string(SensorKind k) {
  switch (k) {
    case SensorKind::Motion: return "M";
    case SensorKind::Item: return "I";
    case SensorKind::Phone: return "P";
    case SensorKind::Door: return "D";
    case SensorKind::Flow: return "F";
  }
  return "?";
}

std::string kind_tag(SensorKind k) {
  switch (k) {
    case SensorKind::Motion: return "Motion";
    case SensorKind::Item: return "Item";
    case SensorKind::Phone: return "Phone";
    case SensorKind::Door: return "Door";
    case SensorKind::Flow: return "Flow";
  }
  return "?";
}

std::optional<SensorKind> kind_of_sensor(const std::string& id) {
  if (id.empty()) return std::nullopt;
  switch (id[0]) {
    case 'M': return SensorKind::Motion;
    case 'I': return SensorKind::Item;
    case 'P': return SensorKind::Phone;
    case 'D': return SensorKind::Door;
    case 'F': return SensorKind::Flow;
    default: return std::nullopt;
  }
}

namespace {

std::string capitalized(const std::string& s) {
  std::string out = s;
  if (!out.empty()) out[0] = (char)std::toupper((unsigned char)out[0]);
  return out;
}

SensorKind kind_from_letter(const std::string& token, int line_no) {
  if (token == "M") return SensorKind::Motion;
  if (token == "I") return SensorKind::Item;
  if (token == "P") return SensorKind::Phone;
  if (token == "D") return SensorKind::Door;
  if (token == "F") return SensorKind::Flow;
  throw ParseError("unknown sensor kind '" + token + "'", line_no, 1);
}

}  // namespace

std::string near_name(const std::string& place) { return "near" + capitalized(place); }
std::string in_name(const std::string& room) { return "in" + capitalized(room); }
std::string near_tag(const std::string& place) { return "Near" + capitalized(place); }
std::string in_tag(const std::string& room) { return "In" + capitalized(room); }

std::set<std::string> Topology::rooms_of(const std::string& sensor) const {
  std::set<std::string> out;
  if (auto it = located_in.find(sensor); it != located_in.end())
    out.insert(it->second);
  if (auto it = near.find(sensor); it != near.end()) {
    for (const std::string& place : it->second) {
      if (rooms.count(place)) out.insert(place);
      else if (auto f = furniture.find(place); f != furniture.end())
        out.insert(f->second);
    }
  }
  return out;
}

std::set<std::string> Topology::location_names() const {
  std::set<std::string> out;
  for (const auto& [id, _] : sensors) {
    if (auto it = near.find(id); it != near.end())
      for (const std::string& place : it->second) out.insert(near_name(place));
    for (const std::string& room : rooms_of(id)) out.insert(in_name(room));
  }
  return out;
}

Topology load_topology(const std::string& text) {
  Topology topo;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string head;
    if (!(words >> head)) continue;

    if (head == "room") {
      std::string name;
      if (!(words >> name)) throw ParseError("room needs a name", line_no, 1);
      topo.rooms.insert(name);
    } else if (head == "furniture") {
      std::string name, kw, room;
      if (!(words >> name >> kw >> room) || kw != "in")
        throw ParseError("expected: furniture <name> in <room>", line_no, 1);
      if (!topo.rooms.count(room))
        throw ParseError("undeclared room '" + room + "'", line_no, 1);
      topo.furniture[name] = room;
    } else if (head == "sensor") {
      std::string id, kw1, kind_token, placement;
      if (!(words >> id >> kw1 >> kind_token) || kw1 != "kind")
        throw ParseError("expected: sensor <id> kind <K> near|in ...", line_no, 1);
      SensorKind kind = kind_from_letter(kind_token, line_no);
      if (topo.sensors.count(id))
        throw ParseError("duplicate sensor '" + id + "'", line_no, 1);
      if (!(words >> placement))
        throw ParseError("sensor '" + id + "' has no placement", line_no, 1);
      topo.sensors[id] = kind;
      if (placement == "near") {
        std::string place;
        bool any = false;
        while (words >> place) {
          if (!topo.furniture.count(place) && !topo.rooms.count(place))
            throw ParseError("undeclared place '" + place + "'", line_no, 1);
          topo.near[id].insert(place);
          any = true;
        }
        if (!any)
          throw ParseError("sensor '" + id + "' has no placement", line_no, 1);
      } else if (placement == "in") {
        std::string room;
        if (!(words >> room) || !topo.rooms.count(room))
          throw ParseError("undeclared room after 'in'", line_no, 1);
        topo.located_in[id] = room;
      } else {
        throw ParseError("expected 'near' or 'in', got '" + placement + "'",
                         line_no, 1);
      }
    } else {
      throw ParseError("unknown directive '" + head + "'", line_no, 1);
    }
  }
  if (topo.sensors.empty()) throw ParseError("no sensors", line_no ? line_no : 1, 1);
  return topo;
}

std::vector<Statement> contextualize(const Topology& topology,
                                     const Statement& raw) {
  auto kind_it = topology.sensors.find(raw.name);
  if (kind_it == topology.sensors.end()) return {};
  SensorKind kind = kind_it->second;

  std::vector<Statement> out;
  Statement tagged = raw;
  tagged.serial = 0;
  tagged.tags.insert(kind_tag(kind));
  out.push_back(std::move(tagged));

  bool localizes = !(kind == SensorKind::Motion && !raw.state);
  if (!localizes) return out;

  auto belief = [&](std::string name, std::string tag) {
    Statement st;
    st.name = std::move(name);
    st.state = true;
    st.time = raw.time;
    st.tags.insert(std::move(tag));
    st.provenance = Provenance::Derived;
    out.push_back(std::move(st));
  };

  if (auto it = topology.near.find(raw.name); it != topology.near.end())
    for (const std::string& place : it->second)
      belief(near_name(place), near_tag(place));
  for (const std::string& room : topology.rooms_of(raw.name))
    belief(in_name(room), in_tag(room));
  return out;
}

std::size_t placing_complexity_bound(const Topology& topology,
                                     const std::vector<TagRule>& tag_rules) {
  std::size_t bound = 0;
  auto rule_tags_for = [&](const std::string& name) {
    std::set<std::string> tags;
    for (const TagRule& rule : tag_rules)
      if (!rule.name || *rule.name == name) tags.insert(rule.add_tag);
    return tags.size();
  };

  for (const auto& [id, _] : topology.sensors)
    bound += 1 + 1 + rule_tags_for(id);  // statement + kind tag + rule tags

  std::set<std::string> beliefs;
  for (const auto& [id, _] : topology.sensors) {
    if (auto it = topology.near.find(id); it != topology.near.end())
      for (const std::string& place : it->second)
        beliefs.insert(near_name(place));
    for (const std::string& room : topology.rooms_of(id))
      beliefs.insert(in_name(room));
  }
  for (const std::string& name : beliefs)
    bound += 1 + 1 + rule_tags_for(name);  // statement + location tag + rule tags
  return bound;
}

}  // namespace fluentnet
