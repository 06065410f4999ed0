#include "fogrelay/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <string_view>
#include <variant>

namespace fogrelay {

namespace {

using Field = std::variant<double*, int*, long*, std::uint64_t*, bool*, std::string*, Mode*,
                           DeltaMode*, EpsilonScope*>;

struct KeyBinding {
  std::string key;
  std::function<Field(SimConfig&)> field;
};

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = {
      {"channel.noise_power", [](SimConfig& c) -> Field { return &c.channel.noise_power; }},
      {"channel.snr_threshold", [](SimConfig& c) -> Field { return &c.channel.snr_threshold; }},
      {"channel.sigma", [](SimConfig& c) -> Field { return &c.channel.path_loss_exponent; }},
      {"channel.delta", [](SimConfig& c) -> Field { return &c.channel.step_delta; }},
      {"channel.distance_floor", [](SimConfig& c) -> Field { return &c.channel.distance_floor; }},
      {"channel.delta_mode", [](SimConfig& c) -> Field { return &c.channel.delta_mode; }},

      {"world.space_size", [](SimConfig& c) -> Field { return &c.world.space_size; }},
      {"world.sources", [](SimConfig& c) -> Field { return &c.world.sources; }},
      {"world.destinations", [](SimConfig& c) -> Field { return &c.world.destinations; }},
      {"world.sensor_power_min", [](SimConfig& c) -> Field { return &c.world.sensor_power_min; }},
      {"world.sensor_power_max", [](SimConfig& c) -> Field { return &c.world.sensor_power_max; }},
      {"world.relay_power", [](SimConfig& c) -> Field { return &c.world.relay_power; }},
      {"world.mobility_bound", [](SimConfig& c) -> Field { return &c.world.mobility_bound; }},
      {"world.r_comm", [](SimConfig& c) -> Field { return &c.world.comm_radius; }},
      {"world.max_degree", [](SimConfig& c) -> Field { return &c.world.max_sensor_degree; }},
      {"world.placement_min", [](SimConfig& c) -> Field { return &c.world.placement_min; }},
      {"world.placement_max", [](SimConfig& c) -> Field { return &c.world.placement_max; }},
      {"world.source_dest_min", [](SimConfig& c) -> Field { return &c.world.source_dest_min; }},
      {"world.source_dest_max", [](SimConfig& c) -> Field { return &c.world.source_dest_max; }},
      {"world.reset_displacement", [](SimConfig& c) -> Field { return &c.world.reset_displacement; }},
      {"world.scenario", [](SimConfig& c) -> Field { return &c.world.scenario_file; }},

      {"energy.capacity", [](SimConfig& c) -> Field { return &c.energy.capacity; }},
      {"energy.move_cost", [](SimConfig& c) -> Field { return &c.energy.move_cost; }},
      {"energy.tx_cost", [](SimConfig& c) -> Field { return &c.energy.tx_cost; }},
      {"energy.sync_cost", [](SimConfig& c) -> Field { return &c.energy.sync_cost; }},

      {"learning.alpha", [](SimConfig& c) -> Field { return &c.learning.alpha; }},
      {"learning.gamma", [](SimConfig& c) -> Field { return &c.learning.gamma; }},
      {"learning.epsilon_coefficient", [](SimConfig& c) -> Field { return &c.learning.epsilon_coefficient; }},
      {"learning.epsilon_scope", [](SimConfig& c) -> Field { return &c.epsilon_scope; }},
      {"learning.episodes", [](SimConfig& c) -> Field { return &c.learning.episodes; }},
      {"learning.max_steps", [](SimConfig& c) -> Field { return &c.learning.max_steps; }},
      {"learning.goal_threshold", [](SimConfig& c) -> Field { return &c.learning.goal_threshold; }},
      {"learning.reward_goal", [](SimConfig& c) -> Field { return &c.learning.reward_goal; }},

      {"coordination.ema_weight", [](SimConfig& c) -> Field { return &c.coordination.ema_weight; }},
      {"coordination.stochastic_packets", [](SimConfig& c) -> Field { return &c.coordination.stochastic_packets; }},
      {"coordination.packets_per_phase", [](SimConfig& c) -> Field { return &c.coordination.packets_per_phase; }},

      {"metrics.last_k", [](SimConfig& c) -> Field { return &c.last_k; }},

      {"run.seed", [](SimConfig& c) -> Field { return &c.seed; }},
      {"run.mode", [](SimConfig& c) -> Field { return &c.mode; }},
      {"run.relays", [](SimConfig& c) -> Field { return &c.relay_count; }},
      {"run.runs", [](SimConfig& c) -> Field { return &c.runs; }},
      {"run.workers", [](SimConfig& c) -> Field { return &c.workers; }},
  };
  return table;
}

const KeyBinding* find_binding(std::string_view key) {
  for (const auto& b : bindings()) {
    if (b.key == key) return &b;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return false;
  out = value;
  return true;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Returns an error message, empty on success.
std::string assign(const Field& field, std::string_view raw) {
  const std::string_view text = trim(raw);
  return std::visit(
      [&](auto* ptr) -> std::string {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, double>) {
          double v;
          if (!parse_number(text, v)) return "expected a real number, got '" + std::string(text) + "'";
          *ptr = v;
        } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long> ||
                             std::is_same_v<T, std::uint64_t>) {
          T v;
          if (!parse_number(text, v)) return "expected an integer, got '" + std::string(text) + "'";
          *ptr = v;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (text == "true" || text == "1") *ptr = true;
          else if (text == "false" || text == "0") *ptr = false;
          else return "expected true or false, got '" + std::string(text) + "'";
        } else if constexpr (std::is_same_v<T, std::string>) {
          *ptr = std::string(text);
        } else if constexpr (std::is_same_v<T, Mode>) {
          auto m = parse_mode(text);
          if (!m) return "expected decentralized or centralized, got '" + std::string(text) + "'";
          *ptr = *m;
        } else if constexpr (std::is_same_v<T, DeltaMode>) {
          if (text == "axis") *ptr = DeltaMode::Axis;
          else if (text == "literal") *ptr = DeltaMode::Literal;
          else return "expected axis or literal, got '" + std::string(text) + "'";
        } else if constexpr (std::is_same_v<T, EpsilonScope>) {
          if (text == "episode") *ptr = EpsilonScope::Episode;
          else if (text == "step") *ptr = EpsilonScope::Step;
          else return "expected episode or step, got '" + std::string(text) + "'";
        }
        return {};
      },
      field);
}

std::string render(const Field& field) {
  return std::visit(
      [](auto* ptr) -> std::string {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, double>) return format_double(*ptr);
        else if constexpr (std::is_same_v<T, bool>) return *ptr ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return *ptr;
        else if constexpr (std::is_same_v<T, Mode>) return std::string(to_string(*ptr));
        else if constexpr (std::is_same_v<T, DeltaMode>) return *ptr == DeltaMode::Axis ? "axis" : "literal";
        else if constexpr (std::is_same_v<T, EpsilonScope>) return std::string(to_string(*ptr));
        else return std::to_string(*ptr);
      },
      field);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration: " + join(violations)), violations_(std::move(violations)) {}

std::string_view to_string(EpsilonScope s) { return s == EpsilonScope::Episode ? "episode" : "step"; }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& b : bindings()) keys.push_back(b.key);
  return keys;
}

Overrides read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({"config file " + path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  Overrides out;
  std::vector<std::string> errors;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      errors.push_back(section + ": key outside of a section");
      continue;
    }
    for (const auto& [key, value] : body) {
      std::string full = section + "." + key;
      if (!find_binding(full)) {
        errors.push_back(full + ": unknown key");
        continue;
      }
      out.emplace_back(std::move(full), value.data());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return out;
}

SimConfig resolve_config(const SimConfig& base, const Overrides& overrides) {
  SimConfig config = base;
  std::vector<std::string> errors;
  for (const auto& [key, value] : overrides) {
    const KeyBinding* b = find_binding(key);
    if (!b) {
      errors.push_back(key + ": unknown key");
      continue;
    }
    if (std::string msg = assign(b->field(config), value); !msg.empty()) errors.push_back(key + ": " + msg);
  }
  for (auto& v : validate(config)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

SimConfig load_config(const std::string& path, const Overrides& overrides) {
  Overrides all;
  if (!path.empty()) all = read_config_file(path);
  all.insert(all.end(), overrides.begin(), overrides.end());
  return resolve_config(SimConfig{}, all);
}

std::vector<std::string> validate(const SimConfig& c) {
  std::vector<std::string> v;
  auto check = [&](bool ok, const char* key, const char* what) {
    if (!ok) v.push_back(std::string(key) + ": " + what);
  };
  auto finite_pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };

  check(finite_pos(c.channel.noise_power), "channel.noise_power", "must be > 0");
  check(finite_pos(c.channel.snr_threshold), "channel.snr_threshold", "must be > 0");
  check(finite_pos(c.channel.path_loss_exponent), "channel.sigma", "must be > 0");
  check(finite_pos(c.channel.step_delta), "channel.delta", "must be > 0");
  check(finite_pos(c.channel.distance_floor), "channel.distance_floor", "must be > 0");

  const auto& w = c.world;
  check(finite_pos(w.space_size), "world.space_size", "must be > 0");
  check(w.sources >= 1, "world.sources", "must be >= 1");
  check(w.destinations >= 1, "world.destinations", "must be >= 1");
  check(finite_pos(w.sensor_power_min), "world.sensor_power_min", "must be > 0");
  check(finite_pos(w.sensor_power_max) && w.sensor_power_max >= w.sensor_power_min, "world.sensor_power_max",
        "must be >= world.sensor_power_min");
  check(finite_pos(w.relay_power), "world.relay_power", "must be > 0");
  check(finite_nonneg(w.mobility_bound), "world.mobility_bound", "must be >= 0");
  check(finite_pos(w.comm_radius), "world.r_comm", "must be > 0");
  check(w.max_sensor_degree >= 1, "world.max_degree", "must be >= 1");
  check(w.placement_min >= 0.0 && w.placement_min <= 1.0, "world.placement_min", "must lie in [0,1]");
  check(w.placement_max >= w.placement_min && w.placement_max <= 1.0, "world.placement_max",
        "must lie in [world.placement_min, 1]");
  check(finite_pos(w.source_dest_min), "world.source_dest_min", "must be > 0");
  check(std::isfinite(w.source_dest_max) && w.source_dest_max >= w.source_dest_min, "world.source_dest_max",
        "must be >= world.source_dest_min");
  check(w.source_dest_min <= w.space_size * std::sqrt(2.0), "world.source_dest_min",
        "exceeds the diagonal of the simulation space");
  check(finite_nonneg(w.reset_displacement) && w.reset_displacement <= w.mobility_bound,
        "world.reset_displacement", "must lie in [0, world.mobility_bound]");

  check(finite_pos(c.energy.capacity), "energy.capacity", "must be > 0");
  check(finite_nonneg(c.energy.move_cost), "energy.move_cost", "must be >= 0");
  check(finite_nonneg(c.energy.tx_cost), "energy.tx_cost", "must be >= 0");
  check(finite_nonneg(c.energy.sync_cost), "energy.sync_cost", "must be >= 0");

  const auto& l = c.learning;
  check(l.alpha > 0.0 && l.alpha <= 1.0, "learning.alpha", "must lie in (0,1]");
  check(l.gamma >= 0.0 && l.gamma < 1.0, "learning.gamma", "must lie in [0,1)");
  check(finite_nonneg(l.epsilon_coefficient), "learning.epsilon_coefficient", "must be >= 0");
  check(l.episodes >= 1, "learning.episodes", "must be >= 1");
  check(l.max_steps >= 1, "learning.max_steps", "must be >= 1");
  check(l.goal_threshold > 0.0 && l.goal_threshold <= 1.0, "learning.goal_threshold", "must lie in (0,1]");
  check(finite_pos(l.reward_goal), "learning.reward_goal", "must be > 0");

  check(c.coordination.ema_weight > 0.0 && c.coordination.ema_weight <= 1.0, "coordination.ema_weight",
        "must lie in (0,1]");
  check(c.coordination.packets_per_phase >= 1, "coordination.packets_per_phase", "must be >= 1");

  check(c.last_k >= 1 && c.last_k <= l.episodes, "metrics.last_k", "must lie in [1, learning.episodes]");

  check(c.relay_count >= 1, "run.relays", "must be >= 1");
  check(c.runs >= 1, "run.runs", "must be >= 1");
  check(c.workers >= 0, "run.workers", "must be >= 0");
  return v;
}

std::string to_ini(const SimConfig& config) {
  SimConfig copy = config;
  std::ostringstream os;
  std::string section;
  for (const auto& b : bindings()) {
    const auto dot = b.key.find('.');
    const std::string sec = b.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << b.key.substr(dot + 1) << " = " << render(b.field(copy)) << '\n';
  }
  return os.str();
}

std::string fingerprint(const SimConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_ini(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fogrelay
