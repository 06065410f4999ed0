#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fogrelay/channel.hpp"
#include "fogrelay/q_agent.hpp"
#include "fogrelay/rng.hpp"

namespace fogrelay {

struct SimConfig;

enum class Mode { Decentralized, Centralized };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

/// Energy in integer micro-units so that charges accumulate exactly.
class Energy {
 public:
  static constexpr double kScale = 1e6;

  constexpr Energy() = default;
  static Energy from_units(double units) { return Energy(static_cast<std::int64_t>(std::llround(units * kScale))); }
  static constexpr Energy from_micro(std::int64_t micro) { return Energy(micro); }

  double units() const { return static_cast<double>(micro_) / kScale; }
  constexpr std::int64_t micro() const { return micro_; }

  constexpr Energy& operator+=(Energy o) { micro_ += o.micro_; return *this; }
  constexpr Energy& operator-=(Energy o) { micro_ -= o.micro_; return *this; }
  friend constexpr Energy operator+(Energy a, Energy b) { return a += b; }
  friend constexpr Energy operator-(Energy a, Energy b) { return a -= b; }
  friend constexpr auto operator<=>(Energy, Energy) = default;

 private:
  constexpr explicit Energy(std::int64_t micro) : micro_(micro) {}
  std::int64_t micro_ = 0;
};

/// consumed / capacity.
inline double fraction_of(Energy consumed, Energy capacity) {
  return static_cast<double>(consumed.micro()) / static_cast<double>(capacity.micro());
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct SensorNode {
  int id = 0;
  Vec2 position;
  double tx_power = 0.1;  // P_I, watts
  int destination = 0;    // index of the destination this sensor reports to

  friend bool operator==(const SensorNode&, const SensorNode&) = default;
};

struct RelayNode {
  int id = 0;
  Vec2 home;
  double displacement = 0.0;  // metres along the sensor-destination axis, + toward destination
  double tx_power = 0.3;      // P_R, watts
  Energy battery;
  Energy battery_capacity;
  bool alive = true;

  friend bool operator==(const RelayNode&, const RelayNode&) = default;
};

struct Topology {
  std::vector<std::vector<int>> sensor_neighbors;  // source -> relay ids, ascending
  std::vector<std::vector<int>> dest_neighbors;    // destination -> relay ids, ascending
  std::vector<std::optional<int>> assignment;      // relay -> source it forwards for

  bool in_sensor_neighborhood(int source, int relay) const;
  bool in_dest_neighborhood(int dest, int relay) const;
  /// Number of sensors that list the relay as a neighbour.
  int sensor_degree(int relay) const;

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// Per-step energy charges; idling is free.
struct EnergyModel {
  double capacity = 5000.0;
  double move_cost = 0.5;
  double tx_cost = 0.5;            // at the reference relay power
  double reference_power = 0.3;    // watts
  double sync_cost = 0.2;          // per relay per step, centralized only
  static constexpr double idle_cost = 0.0;

  double move_tx_cost(double relay_power) const {
    return move_cost + tx_cost * relay_power / reference_power;
  }

  friend bool operator==(const EnergyModel&, const EnergyModel&) = default;
};

struct WorldParams {
  double space_size = 80.0;
  int sources = 1;
  int destinations = 1;
  double sensor_power_min = 0.001;
  double sensor_power_max = 0.3;
  double relay_power = 0.3;
  double mobility_bound = 30.0;
  double comm_radius = 40.0;
  int max_sensor_degree = 6;
  double placement_min = 0.3;
  double placement_max = 0.7;
  double source_dest_min = 15.0;
  double source_dest_max = 25.0;
  double reset_displacement = 30.0;  // half-width of the uniform displacement drawn at reset
  std::string scenario_file;
};

struct WorldState {
  std::vector<SensorNode> sensors;
  std::vector<RelayNode> relays;
  std::vector<Vec2> destinations;
  Topology topology;
  ChannelParams channel;
  EnergyModel energy;
  WorldParams params;
  Rng rng;

  const SensorNode& source_of(int relay) const;
};

class TopologyError : public std::runtime_error {
 public:
  explicit TopologyError(const std::string& what) : std::runtime_error(what) {}
};

class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Builds a world from the config: either the scenario file it names or a
/// random deployment drawn from seed. Deterministic in (config, seed).
WorldState init_world(const SimConfig& config, std::uint64_t seed);

/// Recomputes N_A, N^D and assignments from positions and the radius.
/// Throws TopologyError when a source has no relay reaching its destination.
Topology build_topology(const std::vector<SensorNode>& sensors, const std::vector<RelayNode>& relays,
                        const std::vector<Vec2>& destinations, const WorldParams& params);

/// Shifts the displacement by direction * delta, saturating at the bound.
RelayNode apply_move(const RelayNode& relay, int direction, const ChannelParams& channel,
                     double mobility_bound = 30.0);

/// Deducts the energy of one step; battery floors at 0 and a drained relay dies.
/// Returns the updated relay; `charged` receives the amount actually drawn.
RelayNode charge_energy(const RelayNode& relay, Action action, Mode mode, const EnergyModel& model,
                        Energy* charged = nullptr);

/// Base distances between the relay's home and the source/destination,
/// before displacement.
LinkGeometry base_geometry(const WorldState& world, int relay, int source, int dest);

/// Effective distances for the relay's current displacement. Throws
/// TopologyError when the relay is not a neighbour of the source.
LinkGeometry link_geometry(const WorldState& world, int relay, int source, int dest);

/// Draws fresh displacements, refills batteries and revives relays.
void reset_world(WorldState& world);

/// Scenario schema (JSON): see docs/scenario.md.
WorldState load_scenario(const std::string& path, const SimConfig& config, std::uint64_t seed);

/// Canonical JSON snapshot; identical worlds serialize to identical bytes.
std::string serialize(const WorldState& world);

}  // namespace fogrelay
