#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "fogrelay/rng.hpp"

namespace fogrelay {

enum class Action : std::uint8_t { MoveCloserTx = 0, MoveFartherTx = 1, DoNothing = 2 };

inline constexpr int kActionCount = 3;
inline constexpr int kBinCount = 3;
inline constexpr int kStateCount = kBinCount * kBinCount * kBinCount;

std::string_view to_string(Action a);

inline bool transmits(Action a) { return a != Action::DoNothing; }

/// +1 toward the destination, -1 away from it, 0 when passive.
inline int move_direction(Action a) {
  switch (a) {
    case Action::MoveCloserTx: return +1;
    case Action::MoveFartherTx: return -1;
    case Action::DoNothing: return 0;
  }
  return 0;
}

struct Observation {
  double outage_fraction = 1.0;
  double energy_consumed_fraction = 0.0;
  int redundant_relays = 0;  // other alive relays able to carry the same source
};

struct StateIndex {
  std::uint8_t outage_bin = 0;
  std::uint8_t energy_bin = 0;
  std::uint8_t redundancy_bin = 0;

  int flat() const { return (outage_bin * kBinCount + energy_bin) * kBinCount + redundancy_bin; }
  static StateIndex from_flat(int index);

  friend bool operator==(const StateIndex&, const StateIndex&) = default;
};

struct LearningParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_coefficient = 0.0015;
  int episodes = 100;
  long max_steps = 100000;
  double goal_threshold = 0.95;
  double reward_goal = 100.0;
};

/// Thirds [0,1/3), [1/3,2/3), [2/3,1] for both fractions; redundancy bins are
/// {0}, {1}, {2,...}. Throws DomainError on out-of-range input.
StateIndex discretize(const Observation& obs);

/// Exploration rate e^{-coefficient * n}.
double epsilon(long n, const LearningParams& params);

class QTable {
 public:
  using Row = std::array<double, kActionCount>;

  QTable() = default;
  QTable(double alpha, double gamma) : alpha_(alpha), gamma_(gamma) {}

  double value(StateIndex s, Action a) const { return values_[s.flat()][index(a)]; }
  void set(StateIndex s, Action a, double v) { values_[s.flat()][index(a)] = v; }
  const Row& row(StateIndex s) const { return values_[s.flat()]; }
  double max_value(StateIndex s) const;

  /// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
  void update(StateIndex s, Action a, double reward, StateIndex s_next);

  std::uint64_t visits(StateIndex s, Action a) const { return visits_[s.flat()][index(a)]; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  static std::size_t index(Action a) { return static_cast<std::size_t>(a); }

  double alpha_ = 0.1;
  double gamma_ = 0.9;
  std::array<Row, kStateCount> values_{};
  std::array<std::array<std::uint64_t, kActionCount>, kStateCount> visits_{};
};

/// Epsilon-greedy: uniform random action with probability eps, otherwise the
/// argmax with ties broken uniformly at random.
Action select_action(const QTable& q, StateIndex s, double eps, Rng& rng);

inline double reward(bool goal_reached, const LearningParams& params) {
  return goal_reached ? params.reward_goal : 0.0;
}

/// Plain-text 27x3 matrix, one row per state labelled "(o,e,r)".
void write_qtable(std::ostream& os, const QTable& q);

}  // namespace fogrelay
