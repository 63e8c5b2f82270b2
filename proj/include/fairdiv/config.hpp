#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fairdiv {

// One experiment invocation: a subcommand plus its knobs. Seeds are
// mandatory; nothing in the suite ever touches the wall clock.
struct ExperimentConfig {
  std::string command;
  int n = 2;
  int m = 4;
  int trials = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double eps = 0.0;
  double delta = 0.1;
  double C = 0.1;
  double p = 0.5;   // ER edge probability (btl) or sign parameter (balance)
  int K = 100;      // comparisons per observed pair
  int colors = 0;   // multicolor k; 0 means "use n"
  std::string dist = "uniform:0,1";
  std::string noise = "default";
  std::string order;      // comma-separated pick order; empty = identity
  std::string out;        // report path; empty = stdout
  std::string steps_out;  // optional step-log CSV path
  std::string dump_lp;    // optional LP standard-form listing path
  bool json = false;

  static const std::vector<std::string>& known_commands();

  // Applies one key=value pair; unknown keys and malformed values throw.
  void set(const std::string& key, const std::string& value);

  void validate() const;
};

// Flat key=value text (one pair per line, '#' comments). Parse errors
// carry line numbers; unknown keys are rejected by set().
ExperimentConfig parse_config(const std::string& text);

// Same, layered over an existing config (file values fill in anything
// the command line did not set explicitly).
void apply_config_text(ExperimentConfig& cfg, const std::string& text,
                       const std::vector<std::string>& skip_keys);

}  // namespace fairdiv
