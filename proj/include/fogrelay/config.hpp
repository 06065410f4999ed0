#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogrelay/channel.hpp"
#include "fogrelay/coordination.hpp"
#include "fogrelay/q_agent.hpp"
#include "fogrelay/world.hpp"

namespace fogrelay {

/// Whether the exploration schedule is indexed by episode or by step.
enum class EpsilonScope { Episode, Step };

struct SimConfig {
  ChannelParams channel;
  WorldParams world;
  EnergyModel energy;
  LearningParams learning;
  EpsilonScope epsilon_scope = EpsilonScope::Episode;
  CoordinationParams coordination;
  int last_k = 40;

  std::uint64_t seed = 1;
  Mode mode = Mode::Decentralized;
  int relay_count = 3;
  int runs = 50;
  int workers = 0;  // 0 = hardware concurrency
};

/// Carries every violation found, each prefixed by the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Flat "section.key" -> value assignments, as read from a file or flags.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Reads an INI file into overrides; unknown sections or keys are errors.
Overrides read_config_file(const std::string& path);

/// Applies overrides on top of `base` and validates the result.
SimConfig resolve_config(const SimConfig& base, const Overrides& overrides);

/// Defaults <- file (optional) <- overrides.
SimConfig load_config(const std::string& path, const Overrides& overrides = {});

/// Collects range violations; empty when valid.
std::vector<std::string> validate(const SimConfig& config);

/// Every known key in canonical order.
std::vector<std::string> config_keys();

/// Resolved config as INI text; the same config always yields the same bytes.
std::string to_ini(const SimConfig& config);

/// FNV-1a of to_ini(config), as 16 hex digits.
std::string fingerprint(const SimConfig& config);

std::string_view to_string(EpsilonScope s);

}  // namespace fogrelay
