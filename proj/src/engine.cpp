#include "fogrelay/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

namespace fogrelay {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Goal: return "goal";
    case Termination::Death: return "death";
    case Termination::MaxStep: return "max_step";
  }
  return "?";
}

std::optional<Termination> parse_termination(std::string_view s) {
  if (s == "goal") return Termination::Goal;
  if (s == "death") return Termination::Death;
  if (s == "max_step") return Termination::MaxStep;
  return std::nullopt;
}

bool StepOutcome::all_goals() const {
  return std::all_of(source_goal.begin(), source_goal.end(), [](char g) { return g != 0; });
}

double RunResult::total_ms() const {
  double t = 0.0;
  for (const auto& e : episodes) t += e.duration_ms;
  return t;
}

Simulation::Simulation(const SimConfig& config, std::uint64_t seed, Mode mode, EngineOptions options)
    : Simulation(init_world(config, seed), config, seed, mode, options) {}

Simulation::Simulation(WorldState world, const SimConfig& config, std::uint64_t seed, Mode mode,
                       EngineOptions options)
    : config_(config),
      mode_(mode),
      options_(options),
      world_(std::move(world)),
      policy_rng_(derive_seed(seed, 2)) {
  init_agents();
}

void Simulation::init_agents() {
  agents_.assign(world_.relays.size(), Agent{QTable(config_.learning.alpha, config_.learning.gamma), {}});
  for (std::size_t r = 0; r < agents_.size(); ++r) {
    agents_[r].obs = {1.0, 0.0, initial_redundancy(static_cast<int>(r))};
  }
  const std::size_t n = world_.relays.size();
  step_.relays.assign(n, {});
  step_.source_delivered.assign(world_.sensors.size(), 0.0);
  step_.source_goal.assign(world_.sensors.size(), 0);
  relay_delivered_.assign(n, std::nullopt);
  fragments_.assign(n, std::nullopt);
}

int Simulation::initial_redundancy(int relay) const {
  const auto& a = world_.topology.assignment[relay];
  if (!a) return 0;
  const int dest = world_.sensors[*a].destination;
  int others = 0;
  for (int r : world_.topology.sensor_neighbors[*a]) {
    if (r != relay && world_.relays[r].alive && world_.topology.in_dest_neighborhood(dest, r)) ++others;
  }
  return others;
}

std::vector<int> Simulation::serving_relays(int source) const {
  std::vector<int> out;
  for (int r : world_.topology.sensor_neighbors[source]) {
    if (world_.relays[r].alive && world_.topology.assignment[r] == source) out.push_back(r);
  }
  return out;
}

double Simulation::current_epsilon() const {
  if (options_.fixed_epsilon) return *options_.fixed_epsilon;
  const long n = config_.epsilon_scope == EpsilonScope::Episode ? episode_ : total_steps_;
  return epsilon(n, config_.learning);
}

void Simulation::reset_episode() {
  reset_world(world_);
  for (std::size_t r = 0; r < agents_.size(); ++r) {
    agents_[r].obs = {1.0, 0.0, initial_redundancy(static_cast<int>(r))};
  }
}

double Simulation::sample_delivery(double p_out) {
  if (!config_.coordination.stochastic_packets) return 1.0 - p_out;
  const int m = config_.coordination.packets_per_phase;
  int received = 0;
  for (int i = 0; i < m; ++i) received += bernoulli(policy_rng_, 1.0 - p_out) ? 1 : 0;
  return static_cast<double>(received) / m;
}

const StepOutcome& Simulation::run_step(long /*step_index*/) {
  const int n = static_cast<int>(world_.relays.size());
  const auto& topo = world_.topology;
  const double eps = current_epsilon();
  StepOutcome& out = step_;
  out.q_updates = 0;
  out.clamped_outages = 0;
  std::fill(relay_delivered_.begin(), relay_delivered_.end(), std::nullopt);
  std::fill(fragments_.begin(), fragments_.end(), std::nullopt);

  // Centralized commands: the controller picks one relay per source.
  std::vector<Action> commands;
  std::vector<std::optional<int>> selected;
  if (mode_ == Mode::Centralized) {
    commands.assign(n, Action::DoNothing);
    selected.assign(world_.sensors.size(), std::nullopt);
    for (int s = 0; s < static_cast<int>(world_.sensors.size()); ++s) {
      const std::vector<int> candidates = serving_relays(s);
      selected[s] = centralized_select(controller_, s, candidates, world_);
      if (selected[s]) commands[*selected[s]] = centralized_policy(world_, *selected[s]);
    }
  }

  // Act: every alive relay picks an action, moves, transmits and pays for it.
  std::vector<double> own_outage(n, 1.0);
  for (int r = 0; r < n; ++r) {
    RelayStep& rs = out.relays[r];
    rs = RelayStep{};
    if (!world_.relays[r].alive) continue;
    Agent& agent = agents_[r];
    rs.acted = true;
    rs.before = discretize(agent.obs);
    rs.action = mode_ == Mode::Decentralized ? select_action(agent.q, rs.before, eps, policy_rng_) : commands[r];

    const auto& assigned = topo.assignment[r];
    if (transmits(rs.action)) {
      world_.relays[r] = apply_move(world_.relays[r], move_direction(rs.action), world_.channel,
                                    world_.params.mobility_bound);
      if (assigned) {
        const SensorNode& src = world_.sensors[*assigned];
        const LinkGeometry geom = link_geometry(world_, r, src.id, src.destination);
        const OutageEvaluation eval = evaluate_outage(src.tx_power, world_.relays[r].tx_power, geom, world_.channel);
        out.clamped_outages += eval.clamped ? 1 : 0;
        own_outage[r] = eval.value;
        relay_delivered_[r] = sample_delivery(eval.value);
      }
    }
    world_.relays[r] = charge_energy(world_.relays[r], rs.action, mode_, world_.energy, &rs.charged);
  }

  out.source_delivered = source_delivery(world_, relay_delivered_);
  for (std::size_t s = 0; s < out.source_delivered.size(); ++s) {
    out.source_goal[s] = out.source_delivered[s] >= config_.learning.goal_threshold ? 1 : 0;
  }
  if (mode_ == Mode::Centralized) {
    for (const auto& sel : selected) {
      if (sel && relay_delivered_[*sel])
        controller_.record_delivery(*sel, *relay_delivered_[*sel], config_.coordination.ema_weight);
    }
  }

  // Each destination broadcasts to its neighbourhood; relays apply the discard rule.
  for (int d = 0; d < static_cast<int>(world_.destinations.size()); ++d) {
    const FeedbackMessage msg = build_feedback(d, relay_delivered_, world_);
    for (int r : topo.dest_neighbors[d]) {
      if (auto frag = receive_feedback(r, topo.assignment[r], msg, topo)) fragments_[r] = *frag;
    }
  }

  // Observe, reward, learn.
  for (int r = 0; r < n; ++r) {
    RelayStep& rs = out.relays[r];
    if (!rs.acted) continue;
    Agent& agent = agents_[r];
    const RelayNode& node = world_.relays[r];
    rs.outage = transmits(rs.action) ? own_outage[r] : 1.0;
    agent.obs.outage_fraction = rs.outage;
    agent.obs.energy_consumed_fraction = fraction_of(node.battery_capacity - node.battery, node.battery_capacity);
    if (fragments_[r]) agent.obs.redundant_relays = fragments_[r]->redundant_count;
    rs.after = discretize(agent.obs);

    const auto& assigned = topo.assignment[r];
    // Every alive relay that can serve the source shares its success, passive or not.
    const bool goal = node.alive && assigned && topo.in_sensor_neighborhood(*assigned, r) && out.source_goal[*assigned];
    rs.reward = reward(goal, config_.learning);
    if (mode_ == Mode::Decentralized && options_.learn) {
      agent.q.update(rs.before, rs.action, rs.reward, rs.after);
      rs.updated = true;
      ++out.q_updates;
    }
  }
  ++total_steps_;
  return out;
}

std::optional<Termination> Simulation::check_termination(const StepOutcome& out, long steps) const {
  if (out.all_goals()) return Termination::Goal;
  for (int s = 0; s < static_cast<int>(world_.sensors.size()); ++s) {
    if (serving_relays(s).empty()) return Termination::Death;
  }
  if (steps >= config_.learning.max_steps) return Termination::MaxStep;
  return std::nullopt;
}

EpisodeRecord Simulation::run_episode(int episode) {
  const auto t0 = std::chrono::steady_clock::now();
  episode_ = episode;
  reset_episode();

  const std::size_t n = world_.relays.size();
  EpisodeRecord rec;
  rec.episode = episode;
  rec.epsilon = current_epsilon();
  rec.relay_reward.assign(n, 0.0);
  rec.relay_energy_drawn.assign(n, Energy{});
  rec.relay_actions.assign(n, {0, 0, 0});
  rec.relay_alive_steps.assign(n, 0);

  for (;;) {
    const StepOutcome& out = run_step(rec.steps);
    ++rec.steps;
    rec.clamped_outages += out.clamped_outages;
    for (std::size_t r = 0; r < n; ++r) {
      const RelayStep& rs = out.relays[r];
      if (!rs.acted) continue;
      rec.relay_reward[r] += rs.reward;
      rec.relay_energy_drawn[r] += rs.charged;
      ++rec.relay_actions[r][static_cast<std::size_t>(rs.action)];
      ++rec.relay_alive_steps[r];
    }
    if (auto t = check_termination(out, rec.steps)) {
      rec.termination = *t;
      rec.source_delivered = out.source_delivered;
      break;
    }
  }
  rec.relay_energy_fraction.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const RelayNode& node = world_.relays[r];
    rec.relay_energy_fraction[r] = fraction_of(node.battery_capacity - node.battery, node.battery_capacity);
  }
  rec.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

RunResult run_experiment(const SimConfig& config, std::uint64_t seed, Mode mode) {
  Simulation sim(config, seed, mode);
  RunResult result;
  result.mode = mode;
  result.relay_count = static_cast<int>(sim.world().relays.size());
  result.seed = seed;
  result.episodes.reserve(config.learning.episodes);
  for (int e = 1; e <= config.learning.episodes; ++e) result.episodes.push_back(sim.run_episode(e));
  return result;
}

BatchResult run_batch(const SimConfig& config, std::uint64_t base_seed, int runs, const std::vector<Mode>& modes,
                      const std::vector<int>& relay_counts, int workers, const ProgressFn& progress) {
  struct Task {
    Mode mode;
    int relays;
    int run;
  };
  std::vector<Task> tasks;
  for (Mode m : modes)
    for (int k : relay_counts)
      for (int i = 0; i < runs; ++i) tasks.push_back({m, k, i});

  BatchResult batch;
  batch.config_fingerprint = fingerprint(config);
  batch.runs.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        SimConfig c = config;
        c.mode = tasks[i].mode;
        c.relay_count = tasks[i].relays;
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(tasks[i].run);
        RunResult r = run_experiment(c, seed, tasks[i].mode);
        r.run = tasks[i].run;
        batch.runs[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, tasks.size(), batch.runs[i]);
      }
    }
  };

  unsigned n_workers = workers > 0 ? static_cast<unsigned>(workers) : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return batch;
}

}  // namespace fogrelay
