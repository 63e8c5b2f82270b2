#include "fairdiv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "fairdiv/allocators.hpp"
#include "fairdiv/btl.hpp"
#include "fairdiv/core.hpp"
#include "fairdiv/discrepancy.hpp"
#include "fairdiv/lp.hpp"
#include "fairdiv/noise.hpp"
#include "fairdiv/verify.hpp"

namespace fairdiv {

const char* const kStepLogHeader = "t,node_id,sign,dot_product,c_t,fail_flag,w_inf_norm";

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

int thread_cap() {
  if (const char* env = std::getenv("FAIRDIV_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min(8u, hc));
}

template <typename Fn>
void parallel_trials(int trials, Fn&& fn) {
  const int threads = std::min(thread_cap(), trials);
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= trials) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

ValuationMatrix draw_matrix(int n, int m, const Distribution& d, Stream& rng) {
  std::vector<double> v(static_cast<std::size_t>(n) * m);
  for (auto& x : v) x = sample(d, rng);
  std::optional<std::pair<double, double>> range;
  if (d.family == Distribution::Family::kUniform) range = {d.a, d.b};
  if (d.family == Distribution::Family::kPointMass) range = {d.a, d.a};
  return ValuationMatrix(n, m, std::move(v), range);
}

PickOrder order_from_config(const ExperimentConfig& cfg) {
  if (cfg.order.empty()) return PickOrder::identity(cfg.n);
  std::vector<int> order;
  std::stringstream ss(cfg.order);
  std::string cell;
  while (std::getline(ss, cell, ',')) order.push_back(std::atoi(cell.c_str()));
  return PickOrder(std::move(order));
}

// Per-command defaults that depend on other knobs.
ExperimentConfig resolve_defaults(ExperimentConfig cfg) {
  if (cfg.noise == "default") {
    if (cfg.command == "rr") cfg.noise = "bounded-shift:" + format_double(cfg.eps);
    else if (cfg.command == "lp") cfg.noise = "bounded:" + format_double(cfg.eps);
    else if (cfg.command == "welfare") cfg.noise = "iid:uniform:-0.2,0.2";
    else cfg.noise = "none";
  }
  if (cfg.command == "mhr" && cfg.dist == "uniform:0,1") {
    const double mean =
        cfg.n / (cfg.m * std::log(static_cast<double>(cfg.n) * cfg.m));
    cfg.dist = "exp:" + format_double(mean);
  }
  if (cfg.command == "multicolor" && cfg.colors == 0) cfg.colors = cfg.n;
  return cfg;
}

std::string step_row(int trial_t, int node_id, const StepRecord& rec) {
  (void)trial_t;
  std::string row = std::to_string(rec.t);
  row += ',' + std::to_string(node_id);
  row += ',' + format_double(rec.sign);
  row += ',' + format_double(rec.dot);
  row += ',' + format_double(rec.c_t);
  row += ',' + std::string(rec.fail ? "1" : "0");
  row += ',' + format_double(rec.w_inf_after);
  return row;
}

struct TrialOutcome {
  TrialRow row;
  bool hard_ok = true;
  std::vector<std::string> steps;
  std::vector<std::pair<std::string, std::string>> extras;
  std::string lp_dump;
};

TrialOutcome run_rr_trial(const ExperimentConfig& cfg, int t) {
  Stream rng(cfg.seed, t, "rr/instance");
  const ValuationMatrix truth =
      draw_matrix(cfg.n, cfg.m, Distribution::parse(cfg.dist), rng);
  const NoisyInstance inst = apply_noise(truth, NoiseModel::parse(cfg.noise), rng);
  const Allocation alloc = round_robin(inst.estimates, order_from_config(cfg));

  TrialOutcome out;
  out.row.max_envy_true = envy_report(truth, alloc).max_envy;
  out.row.max_envy_observed = envy_report(inst.estimates, alloc).max_envy;
  out.row.bound_value = rr_envy_bound(cfg.n, cfg.m, inst.eps, truth.bound_b());
  out.row.bound_satisfied = out.row.max_envy_true <= out.row.bound_value;
  out.hard_ok = out.row.bound_satisfied && is_balanced(alloc, cfg.m, cfg.n);
  return out;
}

TrialOutcome run_rr_lowerbound_trial(const ExperimentConfig& cfg, int t) {
  (void)t;
  const ValuationMatrix half = ValuationMatrix::constant(cfg.n, cfg.m, 0.5);
  const Allocation alloc = round_robin(half, order_from_config(cfg));
  const ValuationMatrix truth = adversarial_instance(cfg.n, cfg.m, cfg.eps, alloc);

  TrialOutcome out;
  out.row.max_envy_true = envy_report(truth, alloc).max_envy;
  out.row.max_envy_observed = envy_report(half, alloc).max_envy;
  out.row.bound_value = 2.0 * cfg.eps * cfg.m / cfg.n;
  out.row.bound_satisfied = out.row.max_envy_true >= out.row.bound_value - 1e-9;
  out.hard_ok = out.row.bound_satisfied;
  return out;
}

TrialOutcome run_welfare_trial(const ExperimentConfig& cfg, int t) {
  Stream inst_rng(cfg.seed, t, "welfare/instance");
  Stream algo_rng(cfg.seed, t, "welfare/algo");
  const ValuationMatrix truth =
      draw_matrix(cfg.n, cfg.m, Distribution::parse(cfg.dist), inst_rng);
  const NoisyInstance inst =
      apply_noise(truth, NoiseModel::parse(cfg.noise), inst_rng);
  const Allocation alloc = welfare_max(inst.estimates, algo_rng);

  TrialOutcome out;
  const EnvyReport rep = envy_report(truth, alloc);
  out.row.max_envy_true = rep.max_envy;
  out.row.max_envy_observed = envy_report(inst.estimates, alloc).max_envy;
  out.row.bound_value = 0.0;
  out.row.bound_satisfied = rep.is_envy_free;
  return out;
}

TrialOutcome run_lp_trial(const ExperimentConfig& cfg, int t, bool dump) {
  Stream inst_rng(cfg.seed, t, "lp/instance");
  Stream round_rng(cfg.seed, t, "lp/round");
  const ValuationMatrix truth =
      draw_matrix(cfg.n, cfg.m, Distribution::parse(cfg.dist), inst_rng);
  const NoisyInstance inst =
      apply_noise(truth, NoiseModel::parse(cfg.noise), inst_rng);
  const LpPipelineResult result = lp_pipeline(inst, round_rng);

  TrialOutcome out;
  out.row.max_envy_true = result.true_envy;
  out.row.max_envy_observed = result.observed_envy;
  out.row.bound_value = result.frac.alpha;
  out.row.bound_satisfied = result.true_envy <= kEnvyTol;
  if (dump && cfg.n >= 2)
    out.lp_dump = build_minmax_envy_lp(inst.estimates).to_text();
  return out;
}

TrialOutcome run_balance_trial(const ExperimentConfig& cfg, int t, bool record) {
  Stream sign_rng(cfg.seed, t, "balance/signs");
  Stream vec_rng(cfg.seed, t, "balance/vectors");
  BalancerParams params{cfg.n, cfg.m, cfg.eps, cfg.delta, cfg.C, cfg.p};
  Balancer bal(params);

  std::vector<double> truth(cfg.n), noisy(cfg.n);
  double peak = 0.0;
  bool within = true;
  for (int step = 1; step <= cfg.m; ++step) {
    for (int i = 0; i < cfg.n; ++i) {
      truth[i] = vec_rng.next_double(-1.0, 1.0);
      noisy[i] = truth[i] + vec_rng.next_double(-cfg.eps, cfg.eps);
    }
    bal.step(noisy, sign_rng);
    bal.reveal(truth);
    peak = std::max(peak, bal.w_inf_norm());
    if (bal.w_inf_norm() > balancer_inf_bound(params, step)) within = false;
  }

  TrialOutcome out;
  out.row.max_envy_true = peak;
  out.row.max_envy_observed = bal.w_inf_norm();
  out.row.bound_value = balancer_inf_bound(params, cfg.m);
  out.row.bound_satisfied = within;
  out.row.fail_events = bal.fail_count();
  if (record)
    for (const auto& rec : bal.log()) out.steps.push_back(step_row(t, 0, rec));
  return out;
}

TrialOutcome run_multicolor_trial(const ExperimentConfig& cfg, int t, bool record) {
  Stream sign_rng(cfg.seed, t, "multicolor/signs");
  Stream vec_rng(cfg.seed, t, "multicolor/vectors");
  ColorTree tree(cfg.colors, cfg.n, cfg.m, cfg.eps, cfg.delta, cfg.C);

  std::vector<double> truth(cfg.n), noisy(cfg.n);
  for (int step = 1; step <= cfg.m; ++step) {
    for (int i = 0; i < cfg.n; ++i) {
      truth[i] = vec_rng.next_double(-1.0, 1.0);
      noisy[i] = truth[i] + vec_rng.next_double(-cfg.eps, cfg.eps);
    }
    tree.assign_color(noisy, sign_rng);
    tree.reveal(truth);
  }

  TrialOutcome out;
  out.row.max_envy_observed = tree.multicolored_discrepancy();
  out.row.bound_value =
      multicolor_bound(cfg.n, cfg.m, cfg.colors, cfg.eps, cfg.delta, cfg.C);
  out.row.bound_satisfied = out.row.max_envy_observed <= out.row.bound_value;
  out.row.fail_events = tree.fail_count();
  if (record)
    for (const auto& tagged : tree.log())
      out.steps.push_back(step_row(t, tagged.node_id, tagged.rec));
  return out;
}

TrialOutcome run_online_envy_trial(const ExperimentConfig& cfg, int t, bool record) {
  Stream sign_rng(cfg.seed, t, "online/signs");
  Stream vec_rng(cfg.seed, t, "online/vectors");

  std::vector<double> truth_vals(static_cast<std::size_t>(cfg.n) * cfg.m);
  std::vector<double> noisy_vals(truth_vals.size());
  for (std::size_t idx = 0; idx < truth_vals.size(); ++idx) {
    truth_vals[idx] = vec_rng.next_double(-1.0, 1.0);
    noisy_vals[idx] = truth_vals[idx] + vec_rng.next_double(-cfg.eps, cfg.eps);
  }
  const ValuationMatrix truth(cfg.n, cfg.m, std::move(truth_vals));
  const ValuationMatrix noisy(cfg.n, cfg.m, std::move(noisy_vals));

  OnlineEnvyParams params{cfg.eps, cfg.delta, cfg.C};
  OnlineEnvyAllocator allocator(cfg.n, cfg.m, params);
  std::vector<double> col_noisy(cfg.n), col_true(cfg.n);
  for (int j = 0; j < cfg.m; ++j) {
    for (int i = 0; i < cfg.n; ++i) {
      col_noisy[i] = noisy.at(i, j);
      col_true[i] = truth.at(i, j);
    }
    allocator.decide(col_noisy, sign_rng);
    allocator.reveal(col_true);
  }
  const Allocation alloc = allocator.finish();

  TrialOutcome out;
  out.row.max_envy_true = envy_report(truth, alloc).max_envy;
  out.row.max_envy_observed = allocator.multicolored_discrepancy();
  out.row.bound_value =
      online_envy_bound(cfg.n, cfg.m, cfg.eps, cfg.delta, cfg.C);
  out.row.bound_satisfied = out.row.max_envy_true <= out.row.bound_value;
  out.row.fail_events = allocator.fail_count();
  out.hard_ok = out.row.max_envy_true <= out.row.max_envy_observed + 1e-12;
  if (record && allocator.tree())
    for (const auto& tagged : allocator.tree()->log())
      out.steps.push_back(step_row(t, tagged.node_id, tagged.rec));
  return out;
}

TrialOutcome run_btl_trial(const ExperimentConfig& cfg, int t) {
  Stream inst_rng(cfg.seed, t, "btl/instance");
  Stream run_rng(cfg.seed, t, "btl/run");
  const ValuationMatrix truth =
      draw_matrix(cfg.n, cfg.m, Distribution::parse(cfg.dist), inst_rng);
  const auto [alloc, diag] = btl_fair_divide(truth, cfg.p, cfg.K, run_rng);

  TrialOutcome out;
  out.row.max_envy_true = diag.max_true_envy;
  out.row.max_envy_observed = diag.max_linf_error;
  out.row.bound_value = rr_envy_bound(cfg.n, cfg.m, diag.max_linf_error, 1.0);
  out.row.bound_satisfied = diag.max_true_envy <= out.row.bound_value + 1e-12;
  out.row.fail_events = diag.graph_retries;
  out.hard_ok = out.row.bound_satisfied;
  return out;
}

TrialOutcome run_mhr_trial(const ExperimentConfig& cfg, int t) {
  Stream inst_rng(cfg.seed, t, "mhr/instance");
  Stream noise_rng(cfg.seed, t, "mhr/noise");
  const ValuationMatrix truth = draw_matrix(
      cfg.n, cfg.m, Distribution::parse("uniform:0,1"), inst_rng);
  const auto [alloc, rep] =
      mhr_pipeline(truth, Distribution::parse(cfg.dist), noise_rng);

  TrialOutcome out;
  out.row.max_envy_true = rep.max_true_envy;
  out.row.max_envy_observed = rep.eps_max;
  out.row.bound_value = 10.0;
  out.row.bound_satisfied = rep.envy_le_10;
  out.row.fail_events = rep.order_stat_ok ? 0 : 1;
  if (t == 0) {
    out.extras.emplace_back("beta_log", format_double(rep.beta_log));
    out.extras.emplace_back("beta_harmonic", format_double(rep.beta_harmonic));
    out.extras.emplace_back("mean_precondition_ok",
                            rep.mean_precondition_ok ? "1" : "0");
  }
  return out;
}

TrialOutcome run_statcheck_trial(const ExperimentConfig& cfg, int t) {
  Stream rng(cfg.seed, t, "statcheck/case");
  TrialOutcome out;
  out.row.fail_events = statcheck_case_violations(rng);
  out.row.bound_satisfied = out.row.fail_events == 0;
  out.hard_ok = out.row.bound_satisfied;
  return out;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& raw) {
  raw.validate();
  const ExperimentConfig cfg = resolve_defaults(raw);

  RunReport report;
  report.config = cfg;

  if (cfg.command == "verify-all") {
    const auto results = run_acceptance(cfg.seed);
    for (const auto& r : results) {
      TrialRow row;
      row.trial = r.id;
      row.bound_satisfied = r.pass;
      row.fail_events = r.pass ? 0 : 1;
      row.elapsed_ms = r.elapsed_s * 1000.0;
      report.rows.push_back(row);
      report.summary.extras.emplace_back(
          "criterion_" + std::to_string(r.id),
          (r.pass ? std::string("pass ") : std::string("FAIL ")) + r.name +
              " [" + r.detail + "]");
      report.hard_ok = report.hard_ok && r.pass;
    }
  } else {
    const bool want_steps = !cfg.steps_out.empty();
    std::vector<TrialOutcome> outcomes(cfg.trials);
    parallel_trials(cfg.trials, [&](int t) {
      const auto start = std::chrono::steady_clock::now();
      TrialOutcome out;
      try {
        if (cfg.command == "rr") out = run_rr_trial(cfg, t);
        else if (cfg.command == "rr-lowerbound") out = run_rr_lowerbound_trial(cfg, t);
        else if (cfg.command == "welfare") out = run_welfare_trial(cfg, t);
        else if (cfg.command == "lp") out = run_lp_trial(cfg, t, !cfg.dump_lp.empty() && t == 0);
        else if (cfg.command == "balance") out = run_balance_trial(cfg, t, want_steps && t == 0);
        else if (cfg.command == "multicolor") out = run_multicolor_trial(cfg, t, want_steps && t == 0);
        else if (cfg.command == "online-envy") out = run_online_envy_trial(cfg, t, want_steps && t == 0);
        else if (cfg.command == "btl") out = run_btl_trial(cfg, t);
        else if (cfg.command == "mhr") out = run_mhr_trial(cfg, t);
        else if (cfg.command == "verify-statcheck") out = run_statcheck_trial(cfg, t);
        else throw error("run_experiment: unhandled command " + cfg.command);
      } catch (const std::exception& e) {
        throw error("trial " + std::to_string(t) + ": " + e.what());
      }
      out.row.trial = t;
      out.row.elapsed_ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - start)
              .count();
      outcomes[t] = std::move(out);
    });

    for (auto& out : outcomes) {
      report.rows.push_back(out.row);
      report.hard_ok = report.hard_ok && out.hard_ok;
      for (auto& extra : out.extras)
        report.summary.extras.push_back(std::move(extra));
      for (auto& s : out.steps) report.step_log.push_back(std::move(s));
      if (!out.lp_dump.empty()) report.lp_dump = std::move(out.lp_dump);
    }
  }

  // Summary block, recomputable from the rows.
  auto& s = report.summary;
  s.trials = static_cast<long>(report.rows.size());
  long satisfied = 0;
  std::vector<double> envy_true, envy_obs;
  for (const auto& row : report.rows) {
    if (row.bound_satisfied) ++satisfied;
    s.total_fail_events += row.fail_events;
    envy_true.push_back(row.max_envy_true);
    envy_obs.push_back(row.max_envy_observed);
  }
  s.success_frequency = s.trials ? static_cast<double>(satisfied) / s.trials : 0.0;
  s.ci_half_width =
      s.trials ? 1.96 * std::sqrt(s.success_frequency *
                                  (1.0 - s.success_frequency) / s.trials)
               : 0.0;
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  s.median_envy_true = median(std::move(envy_true));
  s.median_envy_observed = median(std::move(envy_obs));
  return report;
}

namespace {

void write_config_echo(const ExperimentConfig& c, std::ostream& os) {
  os << "# config command=" << c.command << " n=" << c.n << " m=" << c.m
     << " trials=" << c.trials << " seed=" << c.seed
     << " eps=" << format_double(c.eps) << " delta=" << format_double(c.delta)
     << " C=" << format_double(c.C) << " p=" << format_double(c.p)
     << " K=" << c.K << " colors=" << c.colors << " dist=" << c.dist
     << " noise=" << c.noise << " order=" << c.order << "\n";
}

}  // namespace

void write_report_csv(const RunReport& report, std::ostream& os) {
  os << "trial,max_envy_true,max_envy_observed,bound_value,bound_satisfied,"
        "fail_events\n";
  for (const auto& r : report.rows) {
    os << r.trial << ',' << format_double(r.max_envy_true) << ','
       << format_double(r.max_envy_observed) << ','
       << format_double(r.bound_value) << ',' << (r.bound_satisfied ? 1 : 0)
       << ',' << r.fail_events << "\n";
  }
  write_config_echo(report.config, os);
  const auto& s = report.summary;
  os << "# summary trials=" << s.trials
     << " success_frequency=" << format_double(s.success_frequency)
     << " ci_half_width=" << format_double(s.ci_half_width)
     << " median_envy_true=" << format_double(s.median_envy_true)
     << " median_envy_observed=" << format_double(s.median_envy_observed)
     << " total_fail_events=" << s.total_fail_events
     << " hard_ok=" << (report.hard_ok ? 1 : 0) << "\n";
  for (const auto& [k, v] : s.extras) os << "# " << k << "=" << v << "\n";
}

void write_report_json(const RunReport& report, std::ostream& os) {
  nlohmann::json doc;
  const auto& c = report.config;
  doc["command"] = c.command;
  doc["config"] = {{"n", c.n},         {"m", c.m},
                   {"trials", c.trials}, {"seed", c.seed},
                   {"eps", c.eps},     {"delta", c.delta},
                   {"C", c.C},         {"p", c.p},
                   {"K", c.K},         {"colors", c.colors},
                   {"dist", c.dist},   {"noise", c.noise},
                   {"order", c.order}};
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    doc["rows"].push_back({{"trial", r.trial},
                           {"max_envy_true", r.max_envy_true},
                           {"max_envy_observed", r.max_envy_observed},
                           {"bound_value", r.bound_value},
                           {"bound_satisfied", r.bound_satisfied},
                           {"fail_events", r.fail_events}});
  }
  const auto& s = report.summary;
  doc["summary"] = {{"trials", s.trials},
                    {"success_frequency", s.success_frequency},
                    {"ci_half_width", s.ci_half_width},
                    {"median_envy_true", s.median_envy_true},
                    {"median_envy_observed", s.median_envy_observed},
                    {"total_fail_events", s.total_fail_events},
                    {"hard_ok", report.hard_ok}};
  for (const auto& [k, v] : s.extras) doc["summary"]["extras"][k] = v;
  os << doc.dump(2) << "\n";
}

bool execute_and_write(const ExperimentConfig& config, std::ostream& fallback) {
  const RunReport report = run_experiment(config);

  if (!config.out.empty()) {
    std::ofstream file(config.out, std::ios::binary);
    if (!file) throw error("cannot open output path '" + config.out + "'");
    config.json ? write_report_json(report, file) : write_report_csv(report, file);
  } else {
    config.json ? write_report_json(report, fallback)
                : write_report_csv(report, fallback);
  }

  if (!config.steps_out.empty()) {
    std::ofstream steps(config.steps_out, std::ios::binary);
    if (!steps) throw error("cannot open step-log path '" + config.steps_out + "'");
    steps << kStepLogHeader << "\n";
    for (const auto& row : report.step_log) steps << row << "\n";
  }
  if (!config.dump_lp.empty() && !report.lp_dump.empty()) {
    std::ofstream dump(config.dump_lp, std::ios::binary);
    if (!dump) throw error("cannot open LP dump path '" + config.dump_lp + "'");
    dump << report.lp_dump;
  }
  return report.hard_ok;
}

}  // namespace fairdiv
