// Command-line entry point: run, batch, aggregate, dump-qtable.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "fogrelay/config.hpp"
#include "fogrelay/engine.hpp"
#include "fogrelay/metrics.hpp"

namespace fs = std::filesystem;
using namespace fogrelay;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<long> max_steps;
  std::optional<int> workers;
  std::vector<std::string> sets;
  std::string out;
  bool quiet = false;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--episodes", f.episodes, "Episodes per run");
  cmd->add_option("--max-steps", f.max_steps, "Step budget per episode");
  cmd->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--set", f.sets, "Override any key: section.key=value")->take_all();
  cmd->add_flag("--quiet", f.quiet, "No progress on stderr");
  cmd->add_flag("--no-timing", f.no_timing, "Write time_ms as 0 so output is byte-reproducible");
}

Overrides common_overrides(const CommonFlags& f) {
  Overrides o;
  if (f.seed) o.emplace_back("run.seed", std::to_string(*f.seed));
  if (f.episodes) o.emplace_back("learning.episodes", std::to_string(*f.episodes));
  if (f.max_steps) o.emplace_back("learning.max_steps", std::to_string(*f.max_steps));
  if (f.workers) o.emplace_back("run.workers", std::to_string(*f.workers));
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError({s + ": expected section.key=value"});
    o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return o;
}

// Defaults <- file <- preset <- flags. metrics.last_k follows the episode
// count down when nobody set it explicitly.
SimConfig resolve(const CommonFlags& f, const Overrides& preset, const Overrides& flags) {
  Overrides all;
  if (!f.config_path.empty()) all = read_config_file(f.config_path);
  all.insert(all.end(), preset.begin(), preset.end());
  all.insert(all.end(), flags.begin(), flags.end());
  const bool explicit_k =
      std::any_of(all.begin(), all.end(), [](const auto& kv) { return kv.first == "metrics.last_k"; });
  if (!explicit_k) {
    Overrides probe = all;
    probe.emplace_back("metrics.last_k", "1");
    const int episodes = resolve_config(SimConfig{}, probe).learning.episodes;
    all.emplace_back("metrics.last_k", std::to_string(std::min(SimConfig{}.last_k, episodes)));
  }
  return resolve_config(SimConfig{}, all);
}

void prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
}

void write_fingerprint(const std::string& out, const SimConfig& config) {
  const std::string path = (fs::path(out) / "config.ini").string();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << "; resolved configuration, fingerprint " << fingerprint(config) << '\n' << to_ini(config);
}

void strip_timing(std::vector<EpisodeRow>& rows) {
  for (auto& r : rows) r.time_ms = 0.0;
}

int cmd_run(const CommonFlags& f, const std::optional<std::string>& mode, const std::optional<int>& relays) {
  Overrides flags = common_overrides(f);
  if (mode) flags.emplace_back("run.mode", *mode);
  if (relays) flags.emplace_back("run.relays", std::to_string(*relays));
  const SimConfig config = resolve(f, {}, flags);
  const std::string out = f.out.empty() ? "." : f.out;
  prepare_out_dir(out);

  RunResult result = run_experiment(config, config.seed, config.mode);
  auto rows = to_rows(result);
  if (f.no_timing) strip_timing(rows);
  write_episodes_csv((fs::path(out) / "episodes.csv").string(), rows);
  write_fingerprint(out, config);
  if (!f.quiet) {
    std::cerr << "run " << to_string(config.mode) << " relays=" << result.relay_count << " seed=" << config.seed
              << " episodes=" << result.episodes.size() << " -> " << out << "/episodes.csv\n";
  }
  return 0;
}

int cmd_batch(const CommonFlags& f, const std::optional<int>& runs, const std::string& mode,
              const std::vector<int>& relay_counts, bool smoke) {
  Overrides preset;
  if (smoke) {
    preset = {{"run.runs", "2"}, {"learning.episodes", "10"}, {"learning.max_steps", "10000"}};
  }
  Overrides flags = common_overrides(f);
  if (runs) flags.emplace_back("run.runs", std::to_string(*runs));
  const SimConfig config = resolve(f, preset, flags);

  std::vector<Mode> modes;
  if (mode == "both") modes = {Mode::Decentralized, Mode::Centralized};
  else if (auto m = parse_mode(mode)) modes = {*m};
  else throw ConfigError({"run.mode: expected decentralized, centralized or both, got '" + mode + "'"});
  for (int k : relay_counts) {
    if (k < 1) throw ConfigError({"run.relays: relay counts must be >= 1"});
  }

  const std::string out = f.out.empty() ? "." : f.out;
  prepare_out_dir(out);
  ProgressFn progress;
  if (!f.quiet) {
    progress = [](std::size_t done, std::size_t total, const RunResult& r) {
      std::cerr << "[" << done << "/" << total << "] " << to_string(r.mode) << " relays=" << r.relay_count
                << " run=" << r.run << " " << r.total_ms() << " ms\n";
    };
  }
  const BatchResult batch = run_batch(config, config.seed, config.runs, modes, relay_counts, config.workers, progress);
  auto rows = to_rows(batch);
  if (f.no_timing) strip_timing(rows);
  write_episodes_csv((fs::path(out) / "episodes.csv").string(), rows);
  write_summary_csv((fs::path(out) / "summary.csv").string(), aggregate(rows, config.last_k));
  write_fingerprint(out, config);
  return 0;
}

int cmd_aggregate(const std::string& input, int last_k, const std::string& out) {
  if (!fs::is_regular_file(input)) throw IoError("cannot read " + input);
  const auto rows = read_episodes_csv(input);
  const auto summary = aggregate(rows, last_k);
  if (out.empty()) {
    write_summary_csv(std::cout, summary);
  } else {
    prepare_out_dir(out);
    write_summary_csv((fs::path(out) / "summary.csv").string(), summary);
  }
  return 0;
}

int cmd_dump_qtable(const CommonFlags& f, const std::optional<int>& relays) {
  Overrides flags = common_overrides(f);
  if (relays) flags.emplace_back("run.relays", std::to_string(*relays));
  flags.emplace_back("run.mode", "decentralized");
  const SimConfig config = resolve(f, {}, flags);
  Simulation sim(config, config.seed, Mode::Decentralized);
  for (int e = 1; e <= config.learning.episodes; ++e) sim.run_episode(e);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary);
    if (!file) throw IoError("cannot write " + f.out);
    os = &file;
  }
  for (std::size_t r = 0; r < sim.agents().size(); ++r) {
    *os << "# relay " << r << " after " << config.learning.episodes << " episodes, seed " << config.seed << '\n';
    write_qtable(*os, sim.agents()[r].q);
  }
  return 0;
}

int fail(const char* code, const std::string& msg, int status) {
  std::string line = msg;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::cerr << "error[" << code << "]: " << line << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile fog relay simulator with per-relay Q-learning"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::optional<std::string> run_mode;
  std::optional<int> run_relays;
  auto* run = app.add_subcommand("run", "One experiment (all episodes of one seed)");
  add_common(run, run_flags);
  run->add_option("--mode", run_mode, "decentralized | centralized");
  run->add_option("--relays", run_relays, "Number of relays");
  run->add_option("--out", run_flags.out, "Output directory");

  CommonFlags batch_flags;
  std::optional<int> batch_runs;
  std::string batch_mode = "both";
  std::vector<int> batch_relays = {1, 2, 3, 4, 5};
  bool smoke = false;
  auto* batch = app.add_subcommand("batch", "Sweep modes x relay counts x seeds");
  add_common(batch, batch_flags);
  batch->add_option("--runs", batch_runs, "Seeds per (mode, relay count)");
  batch->add_option("--mode", batch_mode, "decentralized | centralized | both");
  batch->add_option("--relays", batch_relays, "Relay counts, comma separated")->delimiter(',');
  batch->add_option("--out", batch_flags.out, "Output directory");
  batch->add_flag("--smoke", smoke, "2 runs, 10 episodes, 10000 steps");

  std::string agg_input;
  int agg_last_k = 40;
  std::string agg_out;
  auto* agg = app.add_subcommand("aggregate", "Recompute summary.csv from an episodes CSV");
  agg->add_option("episodes_csv", agg_input, "episodes.csv")->required();
  agg->add_option("--last-k", agg_last_k, "Trailing episodes pooled per run");
  agg->add_option("--out", agg_out, "Output directory (default: stdout)");

  CommonFlags dump_flags;
  std::optional<int> dump_relays;
  auto* dump = app.add_subcommand("dump-qtable", "Train one decentralized run and print its Q-tables");
  add_common(dump, dump_flags);
  dump->add_option("--relays", dump_relays, "Number of relays");
  dump->add_option("--out", dump_flags.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("E_USAGE", e.what(), 64);
  }

  try {
    if (*run) return cmd_run(run_flags, run_mode, run_relays);
    if (*batch) return cmd_batch(batch_flags, batch_runs, batch_mode, batch_relays, smoke);
    if (*agg) return cmd_aggregate(agg_input, agg_last_k, agg_out);
    if (*dump) return cmd_dump_qtable(dump_flags, dump_relays);
  } catch (const ConfigError& e) {
    return fail("E_CONFIG", e.what(), 2);
  } catch (const ParseError& e) {
    return fail("E_PARSE", e.what(), 4);
  } catch (const IoError& e) {
    return fail("E_IO", e.what(), 3);
  } catch (const std::invalid_argument& e) {
    return fail("E_ARGUMENT", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("E_RUNTIME", e.what(), 1);
  }
  return 0;
}
