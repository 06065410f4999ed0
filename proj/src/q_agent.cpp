#include "fogrelay/q_agent.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fogrelay/channel.hpp"

namespace fogrelay {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::MoveCloserTx: return "move_closer_tx";
    case Action::MoveFartherTx: return "move_farther_tx";
    case Action::DoNothing: return "do_nothing";
  }
  return "?";
}

StateIndex StateIndex::from_flat(int index) {
  StateIndex s;
  s.redundancy_bin = static_cast<std::uint8_t>(index % kBinCount);
  s.energy_bin = static_cast<std::uint8_t>((index / kBinCount) % kBinCount);
  s.outage_bin = static_cast<std::uint8_t>(index / (kBinCount * kBinCount));
  return s;
}

namespace {

std::uint8_t fraction_bin(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) {
    std::ostringstream os;
    os << name << " " << f << " outside [0,1]";
    throw DomainError(os.str());
  }
  if (f < 1.0 / 3.0) return 0;
  if (f < 2.0 / 3.0) return 1;
  return 2;
}

}  // namespace

StateIndex discretize(const Observation& obs) {
  if (obs.redundant_relays < 0) throw DomainError("redundant relay count is negative");
  StateIndex s;
  s.outage_bin = fraction_bin(obs.outage_fraction, "outage_fraction");
  s.energy_bin = fraction_bin(obs.energy_consumed_fraction, "energy_consumed_fraction");
  s.redundancy_bin = static_cast<std::uint8_t>(obs.redundant_relays >= 2 ? 2 : obs.redundant_relays);
  return s;
}

double epsilon(long n, const LearningParams& params) {
  return std::exp(-params.epsilon_coefficient * static_cast<double>(n));
}

double QTable::max_value(StateIndex s) const {
  const Row& r = row(s);
  double best = r[0];
  for (double v : r) best = v > best ? v : best;
  return best;
}

void QTable::update(StateIndex s, Action a, double reward, StateIndex s_next) {
  double& q = values_[s.flat()][index(a)];
  const double target = reward + gamma_ * max_value(s_next);
  q = q + alpha_ * (target - q);
  ++visits_[s.flat()][index(a)];
}

Action select_action(const QTable& q, StateIndex s, double eps, Rng& rng) {
  if (uniform01(rng) < eps) return static_cast<Action>(uniform_index(rng, kActionCount));

  const QTable::Row& r = q.row(s);
  const double best_value = q.max_value(s);
  std::array<int, kActionCount> best{};
  int n_best = 0;
  for (int a = 0; a < kActionCount; ++a) {
    if (r[a] == best_value) best[n_best++] = a;
  }
  const int pick = n_best == 1 ? best[0] : best[uniform_index(rng, static_cast<std::uint64_t>(n_best))];
  return static_cast<Action>(pick);
}

void write_qtable(std::ostream& os, const QTable& q) {
  os << "# state(o,e,r) " << to_string(Action::MoveCloserTx) << ' '
     << to_string(Action::MoveFartherTx) << ' ' << to_string(Action::DoNothing) << '\n';
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  for (int i = 0; i < kStateCount; ++i) {
    const StateIndex s = StateIndex::from_flat(i);
    os << '(' << int(s.outage_bin) << ',' << int(s.energy_bin) << ',' << int(s.redundancy_bin) << ')';
    for (double v : q.row(s)) os << ' ' << v;
    os << '\n';
  }
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace fogrelay
