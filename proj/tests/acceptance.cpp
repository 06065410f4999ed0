// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Thresholds are fixed here and never calibrated at runtime.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fogrelay/channel.hpp"
#include "fogrelay/config.hpp"
#include "fogrelay/engine.hpp"
#include "fogrelay/metrics.hpp"
#include "fogrelay/q_agent.hpp"
#include "property_support.hpp"

using fogrelay::testing::PropertyReport;
using fogrelay::testing::ToyMdp;
using fogrelay::testing::run_invariant_properties;

using namespace fogrelay;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared sweep: both modes, relays 1..5, 10 seeds, 100 episodes, 10000 steps.

constexpr int kSeeds = 10;
constexpr std::uint64_t kBaseSeed = 1;
constexpr int kEpisodes = 100;
constexpr long kMaxSteps = 10000;

SimConfig sweep_config() {
  SimConfig c;
  c.learning.episodes = kEpisodes;
  c.learning.max_steps = kMaxSteps;
  c.runs = kSeeds;
  c.workers = 1;
  return c;
}

struct Sweep {
  BatchResult batch;
  std::vector<EpisodeRow> rows;
  std::vector<SummaryRow> summary;
  std::map<std::pair<Mode, int>, double> wall_ms;  // total wall-clock per (mode, relays)
};

const Sweep& sweep() {
  static const Sweep s = [] {
    Sweep out;
    const SimConfig c = sweep_config();
    for (Mode m : {Mode::Decentralized, Mode::Centralized}) {
      for (int k = 1; k <= 5; ++k) {
        const auto t0 = Clock::now();
        BatchResult b = run_batch(c, kBaseSeed, kSeeds, {m}, {k}, 1);
        out.wall_ms[{m, k}] = seconds_since(t0) * 1e3;
        for (auto& r : b.runs) out.batch.runs.push_back(std::move(r));
      }
    }
    out.rows = to_rows(out.batch);
    out.summary = aggregate(out.rows, 40);
    return out;
  }();
  return s;
}

const SummaryRow& summary_for(Mode m, int k) {
  for (const auto& s : sweep().summary) {
    if (s.mode == m && s.relay_count == k) return s;
  }
  throw std::logic_error("missing summary row");
}

// Per-seed mean delivery over the last 40 episodes.
std::vector<double> per_seed_delivery(Mode m, int k) {
  std::vector<double> out(kSeeds, 0.0);
  std::vector<int> n(kSeeds, 0);
  for (const auto& r : sweep().rows) {
    if (r.mode != m || r.relay_count != k || r.episode <= kEpisodes - 40) continue;
    out[r.run] += r.delivery_pct;
    ++n[r.run];
  }
  for (int i = 0; i < kSeeds; ++i) out[i] /= std::max(1, n[i]);
  return out;
}

// P(X >= wins) for X ~ Binomial(n, 1/2).
double sign_test_p(int wins, int n) {
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
    p += c * std::pow(0.5, n);
  }
  return p;
}

// ---------------------------------------------------------------------------

Verdict outage_oracle() {
  using big = boost::multiprecision::cpp_bin_float_50;
  const auto t0 = Clock::now();
  const ChannelParams p;
  Rng rng(20240601);
  double worst = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double pi = uniform(rng, 0.001, 0.3);
    const double pr = uniform(rng, 0.001, 0.3);
    const double di = uniform(rng, p.distance_floor, 80.0 * std::sqrt(2.0));
    const double ds = uniform(rng, p.distance_floor, 80.0 * std::sqrt(2.0));
    const double raw = evaluate_outage(pi, pr, {di, ds}, p).raw;

    const big n0k = big(p.noise_power) * big(p.snr_threshold);
    const big psi = sqrt(n0k / (big(pr) * pow(big(ds), -big(p.path_loss_exponent))));
    const big ref = 1 - (1 + 2 * psi * psi * log(psi)) * exp(-n0k / (big(pi) * pow(big(di), -big(p.path_loss_exponent))));
    const double rel = static_cast<double>(abs((big(raw) - ref) / ref));
    worst = std::max(worst, rel);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0,
          "max rel err " + fmt(worst) + " over " + std::to_string(n) + " tuples (tol 1e-12), " + fmt(secs) + " s (< 5 s)"};
}

Verdict qlearning_oracle() {
  const auto t0 = Clock::now();
  const ToyMdp mdp = ToyMdp::standard();
  const auto optimal = mdp.value_iteration(0.9);

  QTable q(0.1, 0.9);
  Rng rng(99);
  int s = 0;
  for (long step = 0; step < 1000000; ++step) {
    int a;
    if (uniform01(rng) < 0.2) a = static_cast<int>(uniform_index(rng, 2));
    else a = q.value(ToyMdp::state(s), ToyMdp::action(0)) >= q.value(ToyMdp::state(s), ToyMdp::action(1)) ? 0 : 1;
    const auto [next, r] = mdp.step(s, a, rng);
    q.update(ToyMdp::state(s), ToyMdp::action(a), r, ToyMdp::state(next));
    s = next;
  }
  double linf = 0.0;
  for (int st = 0; st < ToyMdp::kStates; ++st)
    for (int a = 0; a < ToyMdp::kActions; ++a)
      linf = std::max(linf, std::abs(q.value(ToyMdp::state(st), ToyMdp::action(a)) - optimal[st][a]));
  const double secs = seconds_since(t0);
  return {linf <= 1.0 && secs < 30.0, "L_inf " + fmt(linf) + " (tol 1.0), " + fmt(secs) + " s (< 30 s)"};
}

Verdict hand_updates() {
  const StateIndex s{0, 0, 0}, s2{1, 0, 0};
  QTable a(0.1, 0.9);
  a.update(s, Action::DoNothing, 0.0, s2);
  const bool zero = a.value(s, Action::DoNothing) == 0.0;

  QTable b(0.1, 0.9);
  b.update(s, Action::MoveCloserTx, 100.0, s2);
  const bool ten = b.value(s, Action::MoveCloserTx) == 10.0;

  QTable c(0.1, 0.9);
  c.set(s, Action::MoveCloserTx, 10.0);
  c.set(s2, Action::MoveFartherTx, 10.0);
  c.update(s, Action::MoveCloserTx, 0.0, s2);
  const double v = c.value(s, Action::MoveCloserTx);
  const bool nine_nine = v == 10.0 + 0.1 * (0.0 + 0.9 * 10.0 - 10.0);
  return {zero && ten && nine_nine && std::abs(v - 9.9) < 1e-15,
          "0->" + fmt(a.value(s, Action::DoNothing)) + ", 0->" + fmt(b.value(s, Action::MoveCloserTx), 17) + ", 10->" +
              fmt(v, 17)};
}

Verdict convergence() {
  const auto t0 = Clock::now();
  SimConfig c = sweep_config();
  c.relay_count = 3;
  std::vector<double> early(3, 0.0), late(3, 0.0);
  for (int seed = 0; seed < kSeeds; ++seed) {
    Simulation sim(c, kBaseSeed + seed, Mode::Decentralized);
    for (int e = 1; e <= kEpisodes; ++e) {
      const EpisodeRecord rec = sim.run_episode(e);
      for (int r = 0; r < 3; ++r) {
        if (e <= 20) early[r] += rec.relay_alive_steps[r] / 20.0 / kSeeds;
        if (e > 60) late[r] += rec.relay_alive_steps[r] / 40.0 / kSeeds;
      }
    }
  }
  bool ok = true;
  std::string detail;
  for (int r = 0; r < 3; ++r) {
    ok = ok && late[r] <= 0.5 * early[r];
    detail += "agent " + std::to_string(r) + ": " + fmt(early[r]) + " -> " + fmt(late[r]) + " steps; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 300.0, detail + "ratio tol 0.5, " + fmt(secs) + " s (< 300 s)"};
}

Verdict delivery_vs_relays() {
  bool ok = true;
  std::string detail;
  for (int k = 3; k <= 5; ++k) {
    const double d = summary_for(Mode::Decentralized, k).delivery_mean;
    const double cdel = summary_for(Mode::Centralized, k).delivery_mean;
    ok = ok && d >= 95.0 && cdel >= 95.0;
    detail += "k=" + std::to_string(k) + " dec " + fmt(d) + "% cen " + fmt(cdel) + "%; ";
  }
  for (int k = 1; k <= 2; ++k) {
    const auto dec = per_seed_delivery(Mode::Decentralized, k);
    const auto cen = per_seed_delivery(Mode::Centralized, k);
    int wins = 0, n = 0;
    for (int i = 0; i < kSeeds; ++i) {
      if (dec[i] == cen[i]) continue;
      ++n;
      wins += dec[i] > cen[i] ? 1 : 0;
    }
    const double p = n == 0 ? 1.0 : sign_test_p(wins, n);
    const double dm = summary_for(Mode::Decentralized, k).delivery_mean;
    const double cm = summary_for(Mode::Centralized, k).delivery_mean;
    ok = ok && dm >= cm && p < 0.05;
    detail += "k=" + std::to_string(k) + " dec " + fmt(dm) + "% cen " + fmt(cm) + "% wins " + std::to_string(wins) +
              "/" + std::to_string(n) + " p=" + fmt(p) + "; ";
  }
  return {ok, detail};
}

Verdict energy_vs_relays() {
  bool ok = true;
  std::string detail;
  double prev_dec = 1e300, prev_cen = 1e300;
  for (int k = 1; k <= 5; ++k) {
    const double d = summary_for(Mode::Decentralized, k).energy_mean;
    const double cen = summary_for(Mode::Centralized, k).energy_mean;
    const double improvement = cen > 0.0 ? (cen - d) / cen : 0.0;
    ok = ok && d < cen;
    if (k >= 2) ok = ok && improvement >= 0.40 && improvement <= 0.95;
    ok = ok && d <= prev_dec && cen <= prev_cen;
    prev_dec = d;
    prev_cen = cen;
    detail += "k=" + std::to_string(k) + " dec " + fmt(d) + "% cen " + fmt(cen) + "% impr " + fmt(100 * improvement) + "%; ";
  }
  return {ok, detail};
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

Verdict time_scaling() {
  bool ok = true;
  std::string detail;
  const std::vector<double> x = {1, 2, 3, 4, 5};
  for (Mode m : {Mode::Decentralized, Mode::Centralized}) {
    std::vector<double> y;
    for (int k = 1; k <= 5; ++k) y.push_back(sweep().wall_ms.at({m, k}));
    const double r2 = r_squared(x, y);
    ok = ok && r2 >= 0.9;
    detail += std::string(to_string(m)) + " R^2 " + fmt(r2) + " [";
    for (double v : y) detail += fmt(v, 3) + " ";
    detail += "ms]; ";
  }
  std::vector<double> per_agent;
  for (int k = 1; k <= 5; ++k) per_agent.push_back(sweep().wall_ms.at({Mode::Decentralized, k}) / k);
  const auto [lo, hi] = std::minmax_element(per_agent.begin(), per_agent.end());
  const double spread = (*hi - *lo) / *lo;
  ok = ok && spread < 0.25;
  detail += "dec per-agent spread " + fmt(100 * spread) + "% (< 25%)";
  return {ok, detail};
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Drops the trailing time_ms column, the one field that is wall-clock.
std::string without_time_column(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / ("fogrelay_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  auto run = [&](const std::string& name, const std::string& extra) {
    const std::string cmd = std::string(FOGRELAY_CLI) + " batch --smoke --seed 11 --quiet " + extra + " --out " +
                            (base / name).string();
    return std::system(cmd.c_str());
  };
  const int rc = run("a", "") | run("b", "") | run("c", "--no-timing") | run("d", "--no-timing --workers 3");
  if (rc != 0) return {false, "CLI exited nonzero"};
  const std::string a = read_file(base / "a" / "episodes.csv"), b = read_file(base / "b" / "episodes.csv");
  const std::string c = read_file(base / "c" / "episodes.csv"), d = read_file(base / "d" / "episodes.csv");
  const bool same_data = !a.empty() && without_time_column(a) == without_time_column(b);
  const bool same_bytes = !c.empty() && c == d;
  const bool same_config = read_file(base / "a" / "config.ini") == read_file(base / "b" / "config.ini");
  fs::remove_all(base);
  return {same_data && same_bytes && same_config,
          std::string("all columns but time_ms identical: ") + (same_data ? "yes" : "no") +
              "; --no-timing byte-identical (1 vs 3 workers): " + (same_bytes ? "yes" : "no") +
              "; config fingerprint identical: " + (same_config ? "yes" : "no")};
}

Verdict invariants() {
  const int cases = 10000;
  const PropertyReport rep = run_invariant_properties(cases, 424242);
  return {rep.failures.empty(), std::to_string(rep.cases_per_property) + " cases x " +
                                    std::to_string(rep.properties) + " properties" +
                                    (rep.failures.empty() ? "" : ", first failure: " + rep.failures.front())};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {"outage-oracle", outage_oracle},
      {"q-learning-oracle", qlearning_oracle},
      {"hand-checked-updates", hand_updates},
      {"convergence", convergence},
      {"delivery-vs-relays", delivery_vs_relays},
      {"energy-vs-relays", energy_vs_relays},
      {"time-scaling", time_scaling},
      {"determinism", determinism},
      {"invariant-suite", invariants},
  };
  std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.name) continue;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-22s %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
