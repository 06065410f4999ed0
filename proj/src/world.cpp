#include "fogrelay/world.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fogrelay/config.hpp"

namespace fogrelay {

using nlohmann::json;

std::string_view to_string(Mode m) { return m == Mode::Decentralized ? "decentralized" : "centralized"; }

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "decentralized") return Mode::Decentralized;
  if (s == "centralized") return Mode::Centralized;
  return std::nullopt;
}

namespace {

bool contains(const std::vector<int>& sorted, int value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

void check_relay(const WorldState& w, int relay) {
  if (relay < 0 || relay >= static_cast<int>(w.relays.size()))
    throw TopologyError("relay " + std::to_string(relay) + " does not exist");
}

void check_source(const WorldState& w, int source) {
  if (source < 0 || source >= static_cast<int>(w.sensors.size()))
    throw TopologyError("source " + std::to_string(source) + " does not exist");
}

void check_dest(const WorldState& w, int dest) {
  if (dest < 0 || dest >= static_cast<int>(w.destinations.size()))
    throw TopologyError("destination " + std::to_string(dest) + " does not exist");
}

void check_feasible(const WorldState& w) {
  const Topology& t = w.topology;
  for (int s = 0; s < static_cast<int>(w.sensors.size()); ++s) {
    const int d = w.sensors[s].destination;
    bool covered = false;
    for (int r : t.sensor_neighbors[s]) {
      if (t.assignment[r] == s && t.in_dest_neighborhood(d, r)) covered = true;
    }
    if (!covered)
      throw TopologyError("source " + std::to_string(s) + " has no assigned relay that reaches destination " +
                          std::to_string(d));
  }
}

double draw_displacement(Rng& rng, const WorldParams& p) {
  if (p.reset_displacement <= 0.0) return 0.0;
  return uniform(rng, -p.reset_displacement, p.reset_displacement);
}

}  // namespace

bool Topology::in_sensor_neighborhood(int source, int relay) const {
  return source >= 0 && source < static_cast<int>(sensor_neighbors.size()) &&
         contains(sensor_neighbors[source], relay);
}

bool Topology::in_dest_neighborhood(int dest, int relay) const {
  return dest >= 0 && dest < static_cast<int>(dest_neighbors.size()) && contains(dest_neighbors[dest], relay);
}

int Topology::sensor_degree(int relay) const {
  int n = 0;
  for (const auto& nbrs : sensor_neighbors) n += contains(nbrs, relay) ? 1 : 0;
  return n;
}

const SensorNode& WorldState::source_of(int relay) const {
  const auto& a = topology.assignment.at(relay);
  if (!a) throw TopologyError("relay " + std::to_string(relay) + " has no assigned source");
  return sensors.at(*a);
}

Topology build_topology(const std::vector<SensorNode>& sensors, const std::vector<RelayNode>& relays,
                        const std::vector<Vec2>& destinations, const WorldParams& params) {
  if (!(params.comm_radius > 0.0)) throw TopologyError("communication radius must be positive");
  Topology t;
  t.sensor_neighbors.assign(sensors.size(), {});
  t.dest_neighbors.assign(destinations.size(), {});
  t.assignment.assign(relays.size(), std::nullopt);

  const int n_src = static_cast<int>(sensors.size());
  for (int r = 0; r < static_cast<int>(relays.size()); ++r) {
    // Nearest sensors first, capped at the relay's degree.
    std::vector<std::pair<double, int>> in_range;
    for (int s = 0; s < n_src; ++s) {
      const double d = distance(relays[r].home, sensors[s].position);
      if (d <= params.comm_radius) in_range.emplace_back(d, s);
    }
    std::sort(in_range.begin(), in_range.end());
    if (static_cast<int>(in_range.size()) > params.max_sensor_degree) in_range.resize(params.max_sensor_degree);
    for (const auto& [d, s] : in_range) t.sensor_neighbors[s].push_back(r);

    if (n_src > 0) {
      const int primary = r % n_src;
      const bool primary_in_range =
          std::any_of(in_range.begin(), in_range.end(), [&](const auto& e) { return e.second == primary; });
      if (primary_in_range) t.assignment[r] = primary;
      else if (!in_range.empty()) t.assignment[r] = in_range.front().second;
    }
  }
  for (int d = 0; d < static_cast<int>(destinations.size()); ++d) {
    for (int r = 0; r < static_cast<int>(relays.size()); ++r) {
      if (distance(relays[r].home, destinations[d]) <= params.comm_radius) t.dest_neighbors[d].push_back(r);
    }
  }
  return t;
}

WorldState init_world(const SimConfig& config, std::uint64_t seed) {
  if (!config.world.scenario_file.empty()) return load_scenario(config.world.scenario_file, config, seed);
  if (auto v = validate(config); !v.empty()) throw ConfigError(std::move(v));

  const WorldParams& p = config.world;
  WorldState w;
  w.channel = config.channel;
  w.energy = config.energy;
  w.params = p;
  Rng rng(derive_seed(seed, 0));

  for (int d = 0; d < p.destinations; ++d) {
    w.destinations.push_back({uniform(rng, 0.0, p.space_size), uniform(rng, 0.0, p.space_size)});
  }
  for (int s = 0; s < p.sources; ++s) {
    SensorNode node;
    node.id = s;
    node.destination = s % p.destinations;
    const Vec2 dest = w.destinations[node.destination];
    bool placed = false;
    for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
      node.position = {uniform(rng, 0.0, p.space_size), uniform(rng, 0.0, p.space_size)};
      const double d = distance(node.position, dest);
      placed = d >= p.source_dest_min && d <= p.source_dest_max;
    }
    if (!placed)
      throw ConfigError({"world.source_dest_min: no sensor position satisfies the source-destination range"});
    node.tx_power = uniform(rng, p.sensor_power_min, p.sensor_power_max);
    w.sensors.push_back(node);
  }
  const Energy capacity = Energy::from_units(config.energy.capacity);
  for (int r = 0; r < config.relay_count; ++r) {
    const SensorNode& src = w.sensors[r % p.sources];
    const Vec2 dest = w.destinations[src.destination];
    const double f = uniform(rng, p.placement_min, p.placement_max);
    RelayNode relay;
    relay.id = r;
    relay.home = {src.position.x + f * (dest.x - src.position.x), src.position.y + f * (dest.y - src.position.y)};
    relay.tx_power = p.relay_power;
    relay.battery = capacity;
    relay.battery_capacity = capacity;
    relay.displacement = draw_displacement(rng, p);
    w.relays.push_back(relay);
  }
  try {
    w.topology = build_topology(w.sensors, w.relays, w.destinations, p);
    check_feasible(w);
  } catch (const TopologyError& e) {
    throw ConfigError({std::string("world.r_comm: infeasible topology: ") + e.what()});
  }
  w.rng = Rng(derive_seed(seed, 1));
  return w;
}

RelayNode apply_move(const RelayNode& relay, int direction, const ChannelParams& channel, double mobility_bound) {
  if (!relay.alive) throw StateError("relay " + std::to_string(relay.id) + " is dead and cannot move");
  RelayNode out = relay;
  out.displacement = std::clamp(relay.displacement + direction * channel.step_delta, -mobility_bound, mobility_bound);
  return out;
}

RelayNode charge_energy(const RelayNode& relay, Action action, Mode mode, const EnergyModel& model,
                        Energy* charged) {
  if (!relay.alive) throw StateError("relay " + std::to_string(relay.id) + " is dead and cannot be charged");
  double cost = transmits(action) ? model.move_tx_cost(relay.tx_power) : EnergyModel::idle_cost;
  if (mode == Mode::Centralized) cost += model.sync_cost;
  const Energy wanted = Energy::from_units(cost);
  const Energy drawn = std::min(wanted, relay.battery);
  RelayNode out = relay;
  out.battery -= drawn;
  out.alive = out.battery > Energy{};
  if (charged) *charged = drawn;
  return out;
}

LinkGeometry base_geometry(const WorldState& world, int relay, int source, int dest) {
  check_relay(world, relay);
  check_source(world, source);
  check_dest(world, dest);
  const Vec2 home = world.relays[relay].home;
  const double floor = world.channel.distance_floor;
  return {std::max(floor, distance(home, world.sensors[source].position)),
          std::max(floor, distance(home, world.destinations[dest]))};
}

LinkGeometry link_geometry(const WorldState& world, int relay, int source, int dest) {
  check_relay(world, relay);
  check_source(world, source);
  if (!world.topology.in_sensor_neighborhood(source, relay))
    throw TopologyError("relay " + std::to_string(relay) + " is not a neighbour of source " + std::to_string(source));
  return effective_distances(base_geometry(world, relay, source, dest), world.relays[relay].displacement,
                             world.channel, world.params.mobility_bound);
}

void reset_world(WorldState& world) {
  for (RelayNode& r : world.relays) {
    r.battery = r.battery_capacity;
    r.alive = true;
    r.displacement = draw_displacement(world.rng, world.params);
  }
}

WorldState load_scenario(const std::string& path, const SimConfig& config, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"world.scenario: cannot open " + path});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({"world.scenario: " + path + ": " + e.what()});
  }

  WorldState w;
  w.channel = config.channel;
  w.energy = config.energy;
  w.params = config.world;
  const Energy capacity = Energy::from_units(config.energy.capacity);
  try {
    for (const auto& d : doc.at("destinations")) w.destinations.push_back({d.at("x"), d.at("y")});
    int id = 0;
    for (const auto& s : doc.at("sensors")) {
      SensorNode node;
      node.id = id++;
      node.position = {s.at("x"), s.at("y")};
      node.tx_power = s.at("tx_power");
      node.destination = s.value("destination", 0);
      w.sensors.push_back(node);
    }
    id = 0;
    for (const auto& r : doc.at("relays")) {
      RelayNode relay;
      relay.id = id++;
      relay.home = {r.at("x"), r.at("y")};
      relay.tx_power = r.value("tx_power", config.world.relay_power);
      relay.displacement = r.value("displacement", 0.0);
      relay.battery = capacity;
      relay.battery_capacity = capacity;
      w.relays.push_back(relay);
    }
  } catch (const json::exception& e) {
    throw ConfigError({"world.scenario: " + path + ": " + e.what()});
  }

  std::vector<std::string> errors;
  if (w.relays.empty()) errors.push_back("world.scenario: at least one relay is required");
  if (w.sensors.empty()) errors.push_back("world.scenario: at least one sensor is required");
  if (w.destinations.empty()) errors.push_back("world.scenario: at least one destination is required");
  for (const auto& s : w.sensors) {
    if (s.destination < 0 || s.destination >= static_cast<int>(w.destinations.size()))
      errors.push_back("world.scenario: sensor " + std::to_string(s.id) + " names an unknown destination");
    if (!(s.tx_power > 0.0)) errors.push_back("world.scenario: sensor " + std::to_string(s.id) + " tx_power must be > 0");
  }
  for (const auto& r : w.relays) {
    if (std::abs(r.displacement) > config.world.mobility_bound)
      errors.push_back("world.scenario: relay " + std::to_string(r.id) + " displacement outside the mobility bound");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));

  if (doc.contains("adjacency")) {
    const auto& adj = doc["adjacency"];
    auto sorted_ids = [&](const json& list, const char* what) {
      std::vector<int> ids = list.get<std::vector<int>>();
      for (int r : ids) {
        if (r < 0 || r >= static_cast<int>(w.relays.size()))
          throw ConfigError({std::string("world.scenario: ") + what + " names unknown relay " + std::to_string(r)});
      }
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      return ids;
    };
    try {
      for (const auto& list : adj.at("sensor_neighbors")) w.topology.sensor_neighbors.push_back(sorted_ids(list, "sensor_neighbors"));
      for (const auto& list : adj.at("dest_neighbors")) w.topology.dest_neighbors.push_back(sorted_ids(list, "dest_neighbors"));
      w.topology.assignment.assign(w.relays.size(), std::nullopt);
      if (adj.contains("assignment")) {
        const auto& a = adj["assignment"];
        for (std::size_t r = 0; r < a.size() && r < w.relays.size(); ++r) {
          if (!a[r].is_null()) w.topology.assignment[r] = a[r].get<int>();
        }
      }
    } catch (const json::exception& e) {
      throw ConfigError({"world.scenario: adjacency: " + std::string(e.what())});
    }
    if (w.topology.sensor_neighbors.size() != w.sensors.size() ||
        w.topology.dest_neighbors.size() != w.destinations.size())
      throw ConfigError({"world.scenario: adjacency lists must match the sensor and destination counts"});
    for (std::size_t r = 0; r < w.relays.size(); ++r) {
      if (w.topology.sensor_degree(static_cast<int>(r)) > config.world.max_sensor_degree)
        throw ConfigError({"world.scenario: relay " + std::to_string(r) + " exceeds world.max_degree"});
      const auto& a = w.topology.assignment[r];
      if (a && !w.topology.in_sensor_neighborhood(*a, static_cast<int>(r)))
        throw ConfigError({"world.scenario: relay " + std::to_string(r) + " is assigned to a source it cannot hear"});
    }
  } else {
    try {
      w.topology = build_topology(w.sensors, w.relays, w.destinations, config.world);
    } catch (const TopologyError& e) {
      throw ConfigError({std::string("world.r_comm: ") + e.what()});
    }
  }
  try {
    check_feasible(w);
  } catch (const TopologyError& e) {
    throw ConfigError({std::string("world.scenario: infeasible topology: ") + e.what()});
  }
  w.rng = Rng(derive_seed(seed, 1));
  return w;
}

std::string serialize(const WorldState& w) {
  json doc;
  for (const auto& d : w.destinations) doc["destinations"].push_back({{"x", d.x}, {"y", d.y}});
  for (const auto& s : w.sensors)
    doc["sensors"].push_back({{"id", s.id}, {"x", s.position.x}, {"y", s.position.y}, {"tx_power", s.tx_power},
                              {"destination", s.destination}});
  for (const auto& r : w.relays)
    doc["relays"].push_back({{"id", r.id},
                             {"x", r.home.x},
                             {"y", r.home.y},
                             {"tx_power", r.tx_power},
                             {"displacement", r.displacement},
                             {"battery_micro", r.battery.micro()},
                             {"capacity_micro", r.battery_capacity.micro()},
                             {"alive", r.alive}});
  doc["adjacency"]["sensor_neighbors"] = w.topology.sensor_neighbors;
  doc["adjacency"]["dest_neighbors"] = w.topology.dest_neighbors;
  json assignment = json::array();
  for (const auto& a : w.topology.assignment) assignment.push_back(a ? json(*a) : json(nullptr));
  doc["adjacency"]["assignment"] = assignment;
  std::ostringstream rng_state;
  rng_state << w.rng;
  doc["rng"] = rng_state.str();
  return doc.dump();
}

}  // namespace fogrelay
