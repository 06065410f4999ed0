#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "fogrelay/config.hpp"

using namespace fogrelay;
namespace fs = std::filesystem;

namespace {

// Writes `text` to a fresh file under the temp directory.
class TempFile {
 public:
  explicit TempFile(const std::string& text) {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("fogrelay_cfg_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter++) + ".ini");
    std::ofstream(path_) << text;
  }
  ~TempFile() { fs::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  fs::path path_;
};

bool mentions(const ConfigError& e, const std::string& key) {
  for (const auto& v : e.violations())
    if (v.rfind(key, 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("an empty config file yields the documented defaults") {
  TempFile f("");
  const SimConfig c = load_config(f.path());
  CHECK(c.channel.noise_power == 2e-7);
  CHECK(c.channel.snr_threshold == 1.0);
  CHECK(c.channel.path_loss_exponent == 3.0);
  CHECK(c.channel.step_delta == 0.25);
  CHECK(c.world.space_size == 80.0);
  CHECK(c.world.sensor_power_min == 0.001);
  CHECK(c.world.sensor_power_max == 0.3);
  CHECK(c.world.relay_power == 0.3);
  CHECK(c.world.mobility_bound == 30.0);
  CHECK(c.world.max_sensor_degree == 6);
  CHECK(c.learning.alpha == 0.1);
  CHECK(c.learning.gamma == 0.9);
  CHECK(c.learning.epsilon_coefficient == 0.0015);
  CHECK(c.learning.episodes == 100);
  CHECK(c.learning.max_steps == 100000);
  CHECK(c.learning.goal_threshold == 0.95);
  CHECK(c.learning.reward_goal == 100.0);
  CHECK(c.energy.capacity == 5000.0);
  CHECK(c.energy.sync_cost == 0.2);
  CHECK(c.last_k == 40);
  CHECK(c.runs == 50);
  CHECK(c.epsilon_scope == EpsilonScope::Episode);
  CHECK(fingerprint(c) == fingerprint(SimConfig{}));
}

TEST_CASE("file values and overrides layer in order") {
  TempFile f("[run]\nrelays = 4\n\n[learning]\nepisodes = 20\n\n[metrics]\nlast_k = 20\n");
  const SimConfig c = load_config(f.path());
  CHECK(c.relay_count == 4);
  CHECK(c.learning.episodes == 20);
  CHECK(load_config(f.path(), {{"run.relays", "2"}}).relay_count == 2);
}

TEST_CASE("invalid values name their key") {
  TempFile f("[channel]\nsigma = -1\n");
  try {
    load_config(f.path());
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "channel.sigma"));
  }
  auto rejects = [](const Overrides& o, const std::string& key) {
    try {
      resolve_config(SimConfig{}, o);
    } catch (const ConfigError& e) {
      return mentions(e, key);
    }
    return false;
  };
  CHECK(rejects({{"world.r_comm", "0"}}, "world.r_comm"));
  CHECK(rejects({{"learning.alpha", "1.5"}}, "learning.alpha"));
  CHECK(rejects({{"learning.gamma", "abc"}}, "learning.gamma"));
  CHECK(rejects({{"run.mode", "federated"}}, "run.mode"));
  CHECK(rejects({{"metrics.last_k", "101"}}, "metrics.last_k"));
  CHECK(rejects({{"energy.sync_cost", "-0.1"}}, "energy.sync_cost"));
  CHECK(rejects({{"world.sensor_power_min", "0.5"}}, "world.sensor_power"));
  CHECK(rejects({{"nonsense.key", "1"}}, "nonsense.key"));
}

TEST_CASE("unknown keys in a file are rejected") {
  TempFile f("[learning]\nalpah = 0.2\n");
  CHECK_THROWS_AS(read_config_file(f.path()), ConfigError);
  TempFile g("[learning\nalpha = 0.2\n");
  CHECK_THROWS_AS(read_config_file(g.path()), ConfigError);
}

TEST_CASE("canonical INI reproduces the config") {
  SimConfig c;
  c.relay_count = 5;
  c.channel.delta_mode = DeltaMode::Literal;
  c.epsilon_scope = EpsilonScope::Step;
  c.coordination.stochastic_packets = true;
  c.learning.goal_threshold = 0.9;
  TempFile f(to_ini(c));
  const SimConfig back = load_config(f.path());
  CHECK(to_ini(back) == to_ini(c));
  CHECK(fingerprint(back) == fingerprint(c));
}

TEST_CASE("fingerprint is pure and sensitive") {
  const Overrides o = {{"run.relays", "3"}, {"learning.episodes", "10"}, {"metrics.last_k", "10"}};
  CHECK(fingerprint(resolve_config(SimConfig{}, o)) == fingerprint(resolve_config(SimConfig{}, o)));
  SimConfig a, b;
  b.learning.alpha = std::nextafter(0.1, 1.0);
  CHECK(fingerprint(a) != fingerprint(b));
  CHECK(fingerprint(a).size() == 16);
}

TEST_CASE("every key round-trips through the INI writer") {
  const std::string ini = to_ini(SimConfig{});
  for (const auto& key : config_keys()) {
    const auto dot = key.find('.');
    CHECK(ini.find("[" + key.substr(0, dot) + "]") != std::string::npos);
    CHECK(ini.find(key.substr(dot + 1) + " = ") != std::string::npos);
  }
}

TEST_CASE("the shipped default.ini matches the built-in defaults") {
  const SimConfig c = load_config(std::string(FOGRELAY_SOURCE_DIR) + "/configs/default.ini");
  CHECK(to_ini(c) == to_ini(SimConfig{}));
}
