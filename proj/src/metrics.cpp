#include "fogrelay/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace fogrelay {

double delivery_pct(const EpisodeRecord& record) {
  if (record.source_delivered.empty()) return 0.0;
  double sum = 0.0;
  for (double d : record.source_delivered) sum += d;
  return 100.0 * sum / static_cast<double>(record.source_delivered.size());
}

double energy_pct(const EpisodeRecord& record) {
  double sum = 0.0;
  int active = 0;
  for (std::size_t r = 0; r < record.relay_energy_fraction.size(); ++r) {
    if (!record.relay_active(r)) continue;
    sum += record.relay_energy_fraction[r];
    ++active;
  }
  return active == 0 ? 0.0 : 100.0 * sum / active;
}

std::vector<EpisodeRow> to_rows(const RunResult& run) {
  std::vector<EpisodeRow> rows;
  rows.reserve(run.episodes.size());
  for (const auto& e : run.episodes) {
    EpisodeRow row;
    row.mode = run.mode;
    row.relay_count = run.relay_count;
    row.run = run.run;
    row.episode = e.episode;
    row.termination = e.termination;
    row.steps = e.steps;
    row.delivery_pct = delivery_pct(e);
    row.energy_pct = energy_pct(e);
    row.reward_sum = std::accumulate(e.relay_reward.begin(), e.relay_reward.end(), 0.0);
    row.time_ms = e.duration_ms;
    rows.push_back(row);
  }
  return rows;
}

std::vector<EpisodeRow> to_rows(const BatchResult& batch) {
  std::vector<EpisodeRow> rows;
  for (const auto& run : batch.runs) {
    auto r = to_rows(run);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

namespace {

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

// Values are sorted first so the result does not depend on input order.
Stats describe(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<EpisodeRow>& rows, int last_k) {
  if (last_k < 1) throw std::invalid_argument("last_k must be >= 1");
  using Key = std::pair<int, int>;  // (mode, relay_count)
  std::map<Key, std::map<int, std::vector<const EpisodeRow*>>> groups;
  for (const auto& row : rows) groups[{static_cast<int>(row.mode), row.relay_count}][row.run].push_back(&row);

  std::vector<SummaryRow> out;
  for (auto& [key, runs] : groups) {
    std::vector<double> delivery, energy, run_time;
    for (auto& [run, episodes] : runs) {
      // sum in episode order so the total does not depend on row order
      std::sort(episodes.begin(), episodes.end(),
                [](const EpisodeRow* a, const EpisodeRow* b) { return a->episode < b->episode; });
      int max_episode = 0;
      double total = 0.0;
      for (const EpisodeRow* e : episodes) {
        max_episode = std::max(max_episode, e->episode);
        total += e->time_ms;
      }
      if (last_k > max_episode)
        throw std::invalid_argument("last_k " + std::to_string(last_k) + " exceeds the " +
                                    std::to_string(max_episode) + " episodes of run " + std::to_string(run));
      for (const EpisodeRow* e : episodes) {
        if (e->episode > max_episode - last_k) {
          delivery.push_back(e->delivery_pct);
          energy.push_back(e->energy_pct);
        }
      }
      run_time.push_back(total);
    }
    SummaryRow s;
    s.mode = static_cast<Mode>(key.first);
    s.relay_count = key.second;
    const Stats d = describe(delivery), en = describe(energy), t = describe(run_time);
    s.delivery_mean = d.mean;
    s.delivery_sd = d.sd;
    s.energy_mean = en.mean;
    s.energy_sd = en.sd;
    s.time_mean_ms = t.mean;
    s.time_sd_ms = t.sd;
    s.per_agent_time_ms = s.relay_count > 0 ? t.mean / s.relay_count : 0.0;
    s.episodes = static_cast<int>(delivery.size());
    s.runs = static_cast<int>(runs.size());
    out.push_back(s);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

void check_header(std::string_view line, std::string_view expected) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto got = split(line);
  const auto want = split(expected);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size())
      throw ParseError("header is missing column '" + std::string(want[i]) + "'", 1);
    if (got[i] != want[i])
      throw ParseError("header column " + std::to_string(i + 1) + ": expected '" + std::string(want[i]) +
                           "', found '" + std::string(got[i]) + "'",
                       1);
  }
  if (got.size() > want.size())
    throw ParseError("header has unexpected column '" + std::string(got[want.size()]) + "'", 1);
}

class RowReader {
 public:
  RowReader(std::string_view line, long line_no, std::size_t expected) : fields_(split(line)), line_(line_no) {
    if (fields_.size() != expected)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                           " fields, found " + std::to_string(fields_.size()),
                       line_no);
  }

  template <typename T>
  T number(std::size_t i, const char* column) {
    T v{};
    const std::string_view f = fields_[i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) fail(column, f);
    return v;
  }

  Mode mode(std::size_t i) {
    auto m = parse_mode(fields_[i]);
    if (!m) fail("mode", fields_[i]);
    return *m;
  }

  Termination termination(std::size_t i) {
    auto t = parse_termination(fields_[i]);
    if (!t) fail("termination", fields_[i]);
    return *t;
  }

 private:
  [[noreturn]] void fail(const char* column, std::string_view value) const {
    throw ParseError("line " + std::to_string(line_) + ": bad " + column + " value '" + std::string(value) + "'",
                     line_);
  }

  std::vector<std::string_view> fields_;
  long line_;
};

template <typename Row, typename ParseFn>
std::vector<Row> read_rows(std::istream& is, const char* header, std::size_t columns, ParseFn parse) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty file: header row is mandatory", 1);
  check_header(line, header);
  std::vector<Row> rows;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RowReader reader(line, line_no, columns);
    rows.push_back(parse(reader));
  }
  return rows;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path + " for reading");
  return is;
}

}  // namespace

void write_episodes_csv(std::ostream& os, const std::vector<EpisodeRow>& rows) {
  os << kEpisodesHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.mode) << ',' << r.relay_count << ',' << r.run << ',' << r.episode << ','
       << to_string(r.termination) << ',' << r.steps << ',' << format_number(r.delivery_pct) << ','
       << format_number(r.energy_pct) << ',' << format_number(r.reward_sum) << ',' << format_number(r.time_ms)
       << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.mode) << ',' << r.relay_count << ',' << format_number(r.delivery_mean) << ','
       << format_number(r.delivery_sd) << ',' << format_number(r.energy_mean) << ',' << format_number(r.energy_sd)
       << ',' << format_number(r.time_mean_ms) << ',' << format_number(r.time_sd_ms) << ','
       << format_number(r.per_agent_time_ms) << ',' << r.episodes << ',' << r.runs << '\n';
  }
}

std::vector<EpisodeRow> read_episodes_csv(std::istream& is) {
  return read_rows<EpisodeRow>(is, kEpisodesHeader, 10, [](RowReader& f) {
    EpisodeRow r;
    r.mode = f.mode(0);
    r.relay_count = f.number<int>(1, "relay_count");
    r.run = f.number<int>(2, "run");
    r.episode = f.number<int>(3, "episode");
    r.termination = f.termination(4);
    r.steps = f.number<long>(5, "steps");
    r.delivery_pct = f.number<double>(6, "delivery_pct");
    r.energy_pct = f.number<double>(7, "energy_pct");
    r.reward_sum = f.number<double>(8, "reward_sum");
    r.time_ms = f.number<double>(9, "time_ms");
    return r;
  });
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  return read_rows<SummaryRow>(is, kSummaryHeader, 11, [](RowReader& f) {
    SummaryRow r;
    r.mode = f.mode(0);
    r.relay_count = f.number<int>(1, "relay_count");
    r.delivery_mean = f.number<double>(2, "delivery_mean");
    r.delivery_sd = f.number<double>(3, "delivery_sd");
    r.energy_mean = f.number<double>(4, "energy_mean");
    r.energy_sd = f.number<double>(5, "energy_sd");
    r.time_mean_ms = f.number<double>(6, "time_mean_ms");
    r.time_sd_ms = f.number<double>(7, "time_sd_ms");
    r.per_agent_time_ms = f.number<double>(8, "per_agent_time_ms");
    r.episodes = f.number<int>(9, "episodes");
    r.runs = f.number<int>(10, "runs");
    return r;
  });
}

void write_episodes_csv(const std::string& path, const std::vector<EpisodeRow>& rows) {
  auto os = open_out(path);
  write_episodes_csv(os, rows);
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  auto os = open_out(path);
  write_summary_csv(os, rows);
}

std::vector<EpisodeRow> read_episodes_csv(const std::string& path) {
  auto is = open_in(path);
  try {
    return read_episodes_csv(is);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  auto is = open_in(path);
  try {
    return read_summary_csv(is);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

}  // namespace fogrelay
