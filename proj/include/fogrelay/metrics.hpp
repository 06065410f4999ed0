#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogrelay/engine.hpp"

namespace fogrelay {

/// 100 x mean over sources of the final-phase delivered fraction.
double delivery_pct(const EpisodeRecord& record);

/// 100 x mean consumed fraction over relays that transmitted at least once;
/// 0 when none did.
double energy_pct(const EpisodeRecord& record);

/// One line of episodes.csv.
struct EpisodeRow {
  Mode mode = Mode::Decentralized;
  int relay_count = 0;
  int run = 0;
  int episode = 0;
  Termination termination = Termination::MaxStep;
  long steps = 0;
  double delivery_pct = 0.0;
  double energy_pct = 0.0;
  double reward_sum = 0.0;
  double time_ms = 0.0;

  friend bool operator==(const EpisodeRow&, const EpisodeRow&) = default;
};

/// One line of summary.csv.
struct SummaryRow {
  Mode mode = Mode::Decentralized;
  int relay_count = 0;
  double delivery_mean = 0.0;
  double delivery_sd = 0.0;
  double energy_mean = 0.0;
  double energy_sd = 0.0;
  double time_mean_ms = 0.0;
  double time_sd_ms = 0.0;
  double per_agent_time_ms = 0.0;
  int episodes = 0;
  int runs = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line) : std::runtime_error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

inline constexpr const char* kEpisodesHeader =
    "mode,relay_count,run,episode,termination,steps,delivery_pct,energy_pct,reward_sum,time_ms";
inline constexpr const char* kSummaryHeader =
    "mode,relay_count,delivery_mean,delivery_sd,energy_mean,energy_sd,time_mean_ms,time_sd_ms,"
    "per_agent_time_ms,episodes,runs";

std::vector<EpisodeRow> to_rows(const BatchResult& batch);
std::vector<EpisodeRow> to_rows(const RunResult& run);

/// Pools the last `last_k` episodes of every run per (mode, relay_count).
/// Time statistics are over per-run wall-clock totals. Throws
/// std::invalid_argument when last_k exceeds the episodes of some run.
std::vector<SummaryRow> aggregate(const std::vector<EpisodeRow>& rows, int last_k = 40);

void write_episodes_csv(std::ostream& os, const std::vector<EpisodeRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
std::vector<EpisodeRow> read_episodes_csv(std::istream& is);
std::vector<SummaryRow> read_summary_csv(std::istream& is);

void write_episodes_csv(const std::string& path, const std::vector<EpisodeRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
std::vector<EpisodeRow> read_episodes_csv(const std::string& path);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

/// Shortest decimal that round-trips, always with '.' as separator.
std::string format_number(double v);

}  // namespace fogrelay
