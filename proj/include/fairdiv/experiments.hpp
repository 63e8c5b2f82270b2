#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fairdiv/config.hpp"

namespace fairdiv {

struct TrialRow {
  long trial = 0;
  double max_envy_true = 0.0;
  double max_envy_observed = 0.0;
  double bound_value = 0.0;
  bool bound_satisfied = true;
  long fail_events = 0;
  double elapsed_ms = 0.0;  // in-memory only; reports stay byte-stable
};

struct Summary {
  long trials = 0;
  double success_frequency = 0.0;
  double ci_half_width = 0.0;  // 1.96 sqrt(f(1-f)/T)
  double median_envy_true = 0.0;
  double median_envy_observed = 0.0;
  long total_fail_events = 0;
  std::vector<std::pair<std::string, std::string>> extras;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<TrialRow> rows;
  Summary summary;
  std::vector<std::string> step_log;  // formatted rows for trial 0, if any
  std::string lp_dump;                // standard-form listing of trial 0's LP
  bool hard_ok = true;  // deterministic per-trial invariants all held
};

// Executes config.trials independent trials of the named pipeline.
// Trials run in parallel up to FAIRDIV_THREADS; per-trial substreams are
// keyed by (seed, trial, module tag), so results never depend on the
// thread count and rows always land in trial order.
RunReport run_experiment(const ExperimentConfig& config);

// CSV with a '#'-prefixed summary footer; byte-identical across runs of
// the same config.
void write_report_csv(const RunReport& report, std::ostream& os);
void write_report_json(const RunReport& report, std::ostream& os);

// Runs, writes config.out (or stdout), writes the step log when asked.
// Returns the hard-invariant verdict (process exit status).
bool execute_and_write(const ExperimentConfig& config, std::ostream& fallback);

// Shortest round-trip decimal form; the workhorse for byte-stable output.
std::string format_double(double v);

// Step-log CSV header: t,node_id,sign,dot_product,c_t,fail_flag,w_inf_norm
extern const char* const kStepLogHeader;

}  // namespace fairdiv
