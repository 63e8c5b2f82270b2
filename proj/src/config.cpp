#include "fairdiv/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "fairdiv/core.hpp"
#include "fairdiv/noise.hpp"

namespace fairdiv {

namespace {

long parse_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw error("config: key '" + key + "' needs an integer, got '" + value + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw error("config: key '" + key + "' needs a number, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw error("config: key '" + key + "' needs a boolean, got '" + value + "'");
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::known_commands() {
  static const std::vector<std::string> cmds = {
      "rr",       "rr-lowerbound", "welfare", "lp",
      "online-envy", "balance",    "multicolor", "btl",
      "mhr",      "verify-statcheck", "verify-all"};
  return cmds;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "subcommand" || key == "command") command = value;
  else if (key == "n") n = static_cast<int>(parse_long(key, value));
  else if (key == "m") m = static_cast<int>(parse_long(key, value));
  else if (key == "trials") trials = static_cast<int>(parse_long(key, value));
  else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_long(key, value));
    seed_set = true;
  }
  else if (key == "eps") eps = parse_real(key, value);
  else if (key == "delta") delta = parse_real(key, value);
  else if (key == "C") C = parse_real(key, value);
  else if (key == "p") p = parse_real(key, value);
  else if (key == "K") K = static_cast<int>(parse_long(key, value));
  else if (key == "colors") colors = static_cast<int>(parse_long(key, value));
  else if (key == "dist") dist = value;
  else if (key == "noise") noise = value;
  else if (key == "order") order = value;
  else if (key == "out") out = value;
  else if (key == "steps") steps_out = value;
  else if (key == "dump-lp") dump_lp = value;
  else if (key == "json") json = parse_bool(key, value);
  else throw error("config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (command.empty()) throw error("config: subcommand required");
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
    throw error("config: unknown subcommand '" + command + "'");
  if (!seed_set) throw error("config: seed required");
  if (trials < 1) throw error("config: trials must be >= 1");
  if (n < 1) throw error("config: n must be >= 1");
  if (m < 0) throw error("config: m must be >= 0");
  if (eps < 0.0) throw error("config: eps must be >= 0");
  if (!(delta > 0.0 && delta <= 0.5)) throw error("config: delta must lie in (0, 1/2]");
  if (!(C > 0.0 && C < 0.125)) throw error("config: C must lie in (0, 1/8)");
  if (K < 1) throw error("config: K must be >= 1");
  if (colors < 0) throw error("config: colors must be >= 0");

  if (command == "balance") {
    if (!(p >= 0.5 && p <= 2.0 / 3.0))
      throw error("config: balance needs p in [1/2, 2/3]");
  } else if (!(p >= 0.0 && p <= 1.0)) {
    throw error("config: p must lie in [0, 1]");
  }
  if (noise != "default" && noise != "none") NoiseModel::parse(noise);
  if (!dist.empty()) Distribution::parse(dist);
  if (!order.empty()) {
    std::stringstream ss(order);
    std::string cell;
    while (std::getline(ss, cell, ',')) parse_long("order", cell);
  }
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text,
                       const std::vector<std::string>& skip_keys) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error("config: line " + std::to_string(line_no) +
                  ": expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (std::find(skip_keys.begin(), skip_keys.end(), key) != skip_keys.end())
      continue;  // command line wins
    try {
      cfg.set(key, value);
    } catch (const error& e) {
      throw error("config: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  apply_config_text(cfg, text, {});
  cfg.validate();
  return cfg;
}

}  // namespace fairdiv
