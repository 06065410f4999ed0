#include "fogrelay/coordination.hpp"

#include <algorithm>

namespace fogrelay {

const SourceReport* FeedbackMessage::find(int source) const {
  for (const auto& r : per_source) {
    if (r.source == source) return &r;
  }
  return nullptr;
}

std::vector<double> source_delivery(const WorldState& world,
                                    std::span<const std::optional<double>> relay_delivered) {
  std::vector<double> best(world.sensors.size(), 0.0);
  const auto& assignment = world.topology.assignment;
  for (std::size_t r = 0; r < relay_delivered.size() && r < assignment.size(); ++r) {
    if (!relay_delivered[r] || !assignment[r]) continue;
    double& b = best[static_cast<std::size_t>(*assignment[r])];
    b = std::max(b, *relay_delivered[r]);
  }
  return best;
}

FeedbackMessage build_feedback(int dest, std::span<const std::optional<double>> relay_delivered,
                               const WorldState& world) {
  const std::vector<double> delivered = source_delivery(world, relay_delivered);
  const Topology& t = world.topology;
  FeedbackMessage msg;
  msg.destination = dest;
  for (int s = 0; s < static_cast<int>(world.sensors.size()); ++s) {
    if (world.sensors[s].destination != dest) continue;
    SourceReport report;
    report.source = s;
    report.delivered_fraction = delivered[s];
    for (int r : t.sensor_neighbors[s]) {
      if (world.relays[r].alive && t.in_dest_neighborhood(dest, r)) report.potential_relays.push_back(r);
    }
    msg.per_source.push_back(std::move(report));
  }
  return msg;
}

std::optional<FeedbackFragment> receive_feedback(int relay, std::optional<int> source_assignment,
                                                 const FeedbackMessage& msg, const Topology& topology) {
  if (!topology.in_dest_neighborhood(msg.destination, relay)) return std::nullopt;
  if (!source_assignment || !topology.in_sensor_neighborhood(*source_assignment, relay)) return std::nullopt;
  const SourceReport* report = msg.find(*source_assignment);
  if (!report) return std::nullopt;
  const auto& pot = report->potential_relays;
  const int self = std::binary_search(pot.begin(), pot.end(), relay) ? 1 : 0;
  return FeedbackFragment{report->delivered_fraction, static_cast<int>(pot.size()) - self};
}

void ControllerState::record_delivery(int relay, double fraction, double ema_weight) {
  auto [it, inserted] = delivery_history.try_emplace(relay, fraction);
  if (!inserted) it->second = ema_weight * fraction + (1.0 - ema_weight) * it->second;
}

double predicted_delivery(const WorldState& world, int relay, double displacement) {
  const SensorNode& src = world.source_of(relay);
  const LinkGeometry base = base_geometry(world, relay, src.id, src.destination);
  const LinkGeometry geom = effective_distances(base, displacement, world.channel, world.params.mobility_bound);
  return 1.0 - outage_probability(src.tx_power, world.relays[relay].tx_power, geom, world.channel);
}

std::optional<int> centralized_select(ControllerState& ctrl, int source, std::span<const int> candidates,
                                      const WorldState& world) {
  if (candidates.empty()) {
    ctrl.current_active.erase(source);
    return std::nullopt;
  }
  std::vector<int> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());
  int best = order.front();
  double best_score = -1.0;
  for (int r : order) {
    const auto it = ctrl.delivery_history.find(r);
    const double score = it != ctrl.delivery_history.end()
                             ? it->second
                             : predicted_delivery(world, r, world.relays[r].displacement);
    if (score > best_score) {
      best_score = score;
      best = r;
    }
  }
  ctrl.current_active[source] = best;
  return best;
}

Action centralized_policy(const WorldState& world, int relay) {
  const RelayNode& node = world.relays.at(relay);
  const double bound = world.params.mobility_bound;
  auto outage_after = [&](int direction) {
    const double d = std::clamp(node.displacement + direction * world.channel.step_delta, -bound, bound);
    return 1.0 - predicted_delivery(world, relay, d);
  };
  const double closer = outage_after(move_direction(Action::MoveCloserTx));
  const double farther = outage_after(move_direction(Action::MoveFartherTx));
  return farther < closer ? Action::MoveFartherTx : Action::MoveCloserTx;
}

}  // namespace fogrelay
