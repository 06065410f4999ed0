#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fogrelay/config.hpp"
#include "fogrelay/coordination.hpp"
#include "fogrelay/q_agent.hpp"
#include "fogrelay/world.hpp"

namespace fogrelay {

enum class Termination { Goal, Death, MaxStep };

std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view s);

struct RelayStep {
  bool acted = false;  // alive when the step began
  Action action = Action::DoNothing;
  StateIndex before;
  StateIndex after;
  double outage = 1.0;  // what the agent observed
  Energy charged;
  double reward = 0.0;
  bool updated = false;
};

struct StepOutcome {
  std::vector<RelayStep> relays;
  std::vector<double> source_delivered;
  std::vector<char> source_goal;
  int q_updates = 0;
  int clamped_outages = 0;

  bool all_goals() const;
};

struct EpisodeRecord {
  int episode = 1;  // 1-based
  Termination termination = Termination::MaxStep;
  long steps = 0;
  double epsilon = 1.0;  // exploration rate at the first step
  std::vector<double> relay_reward;
  std::vector<double> relay_energy_fraction;
  std::vector<Energy> relay_energy_drawn;
  std::vector<std::array<long, kActionCount>> relay_actions;
  std::vector<long> relay_alive_steps;
  std::vector<double> source_delivered;  // final phase
  long clamped_outages = 0;
  double duration_ms = 0.0;

  bool relay_active(std::size_t r) const {
    return relay_actions[r][0] + relay_actions[r][1] > 0;
  }
};

struct RunResult {
  Mode mode = Mode::Decentralized;
  int relay_count = 0;
  int run = 0;
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> episodes;

  double total_ms() const;
};

struct BatchResult {
  std::vector<RunResult> runs;  // ordered by (mode, relay_count, run)
  std::string config_fingerprint;
};

struct Agent {
  QTable q;
  Observation obs;
};

/// Knobs used by tests and diagnostics to freeze behaviour.
struct EngineOptions {
  std::optional<double> fixed_epsilon;
  bool learn = true;
};

/// One simulation run: the world, the per-relay agents and the controller.
class Simulation {
 public:
  Simulation(const SimConfig& config, std::uint64_t seed, Mode mode, EngineOptions options = {});
  Simulation(WorldState world, const SimConfig& config, std::uint64_t seed, Mode mode, EngineOptions options = {});

  /// Resets the environment for a new episode; Q-tables and controller persist.
  void reset_episode();

  /// One transmission phase for every alive relay.
  const StepOutcome& run_step(long step_index);

  /// Resets, then steps until every source hits the goal, a source loses all
  /// its relays, or the step budget runs out.
  EpisodeRecord run_episode(int episode);

  WorldState& world() { return world_; }
  const WorldState& world() const { return world_; }
  std::vector<Agent>& agents() { return agents_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const ControllerState& controller() const { return controller_; }
  Mode mode() const { return mode_; }
  long total_steps() const { return total_steps_; }
  double current_epsilon() const;

  /// Alive relays assigned to and heard by the source.
  std::vector<int> serving_relays(int source) const;

 private:
  void init_agents();
  int initial_redundancy(int relay) const;
  std::optional<Termination> check_termination(const StepOutcome& out, long steps) const;
  double sample_delivery(double p_out);

  SimConfig config_;
  Mode mode_;
  EngineOptions options_;
  WorldState world_;
  std::vector<Agent> agents_;
  ControllerState controller_;
  Rng policy_rng_;
  StepOutcome step_;
  std::vector<std::optional<double>> relay_delivered_;
  std::vector<std::optional<FeedbackFragment>> fragments_;
  int episode_ = 1;
  long total_steps_ = 0;
};

RunResult run_experiment(const SimConfig& config, std::uint64_t seed, Mode mode);

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const RunResult&)>;

/// Sweeps modes x relay_counts x runs (seed = base_seed + run). Runs execute
/// on `workers` threads (0 = hardware concurrency); the result order never
/// depends on scheduling.
BatchResult run_batch(const SimConfig& config, std::uint64_t base_seed, int runs, const std::vector<Mode>& modes,
                      const std::vector<int>& relay_counts, int workers = 0, const ProgressFn& progress = {});

}  // namespace fogrelay
