#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fogrelay/q_agent.hpp"
#include "fogrelay/world.hpp"

namespace fogrelay {

struct CoordinationParams {
  double ema_weight = 0.3;          // weight of the newest phase in the controller history
  bool stochastic_packets = false;  // sample delivered packets instead of using 1 - P_out
  int packets_per_phase = 100;
};

/// What the destination reports about one source after a phase.
struct SourceReport {
  int source = 0;
  double delivered_fraction = 0.0;
  std::vector<int> potential_relays;  // alive, in N_source and N^D, ascending

  friend bool operator==(const SourceReport&, const SourceReport&) = default;
};

/// Broadcast from a destination to every relay in its neighbourhood.
struct FeedbackMessage {
  int destination = 0;
  std::vector<SourceReport> per_source;  // ascending source id

  const SourceReport* find(int source) const;

  friend bool operator==(const FeedbackMessage&, const FeedbackMessage&) = default;
};

/// Feedback a relay keeps after the discard rule.
struct FeedbackFragment {
  double delivered_fraction = 0.0;
  int redundant_count = 0;

  friend bool operator==(const FeedbackFragment&, const FeedbackFragment&) = default;
};

/// Per-source delivered fraction of a phase: the best transmitting relay
/// assigned to the source, 0 when none transmitted.
std::vector<double> source_delivery(const WorldState& world,
                                    std::span<const std::optional<double>> relay_delivered);

/// `relay_delivered[r]` holds the fraction relay r delivered this phase, or
/// nothing when it stayed passive.
FeedbackMessage build_feedback(int dest, std::span<const std::optional<double>> relay_delivered,
                               const WorldState& world);

/// Applies the discard rule: feedback is ignored unless it covers the relay's
/// assigned source and the relay is a neighbour of that source.
std::optional<FeedbackFragment> receive_feedback(int relay, std::optional<int> source_assignment,
                                                 const FeedbackMessage& msg, const Topology& topology);

struct ControllerState {
  std::map<int, double> delivery_history;  // relay -> EMA of delivered fraction
  std::map<int, int> current_active;       // source -> selected relay

  void record_delivery(int relay, double fraction, double ema_weight);
};

/// Picks the relay with the best delivery history; relays never selected are
/// scored by the predicted 1 - P_out of a probe transmission. Ties go to the
/// lowest id. Returns nothing when there is no candidate.
std::optional<int> centralized_select(ControllerState& ctrl, int source, std::span<const int> candidates,
                                      const WorldState& world);

/// One-step steepest descent on predicted outage over the two moves; ties
/// favour moving closer.
Action centralized_policy(const WorldState& world, int relay);

/// 1 - P_out at the relay's current position.
double predicted_delivery(const WorldState& world, int relay, double displacement);

}  // namespace fogrelay
