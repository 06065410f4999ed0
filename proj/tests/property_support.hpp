#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fogrelay/q_agent.hpp"
#include "fogrelay/rng.hpp"

namespace fogrelay::testing {

// Three-state, two-action MDP with stochastic transitions, embedded in the
// first three rows and first two columns of a QTable.
struct ToyMdp {
  static constexpr int kStates = 3;
  static constexpr int kActions = 2;

  std::array<std::array<std::array<double, kStates>, kActions>, kStates> transition{};
  std::array<std::array<double, kActions>, kStates> reward{};

  static ToyMdp standard();
  static StateIndex state(int s) { return StateIndex::from_flat(s); }
  static Action action(int a) { return static_cast<Action>(a); }

  std::pair<int, double> step(int s, int a, Rng& rng) const;
  // Brute-force fixed point of the Bellman optimality operator.
  std::array<std::array<double, kActions>, kStates> value_iteration(double gamma) const;
};

struct PropertyReport {
  int properties = 0;
  int cases_per_property = 0;
  std::vector<std::string> failures;
};

// Q-value bound, battery floor, displacement bound, termination trichotomy,
// discard soundness and clamped outage range, `cases` random cases each.
PropertyReport run_invariant_properties(int cases, std::uint64_t seed);

}  // namespace fogrelay::testing
