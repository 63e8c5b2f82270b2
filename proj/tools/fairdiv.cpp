#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairdiv/config.hpp"
#include "fairdiv/core.hpp"
#include "fairdiv/experiments.hpp"

namespace {

struct CliOptions {
  fairdiv::ExperimentConfig cfg;
  std::string config_path;
};

// Attaches the shared option set to one subcommand. CLI11 reports which
// flags were actually given, which is what lets config files fill in the
// rest without overriding the command line.
void attach_options(CLI::App* sub, CliOptions& opts,
                    std::vector<std::pair<std::string, CLI::Option*>>& given) {
  auto& cfg = opts.cfg;
  given.emplace_back("n", sub->add_option("--n", cfg.n, "agent count / vector dimension"));
  given.emplace_back("m", sub->add_option("--m", cfg.m, "item count / stream length"));
  given.emplace_back("trials", sub->add_option("--trials", cfg.trials, "independent trials"));
  auto* seed = sub->add_option("--seed", cfg.seed, "64-bit stream seed (required)");
  given.emplace_back("seed", seed);
  given.emplace_back("eps", sub->add_option("--eps", cfg.eps, "noise bound"));
  given.emplace_back("delta", sub->add_option("--delta", cfg.delta, "failure budget"));
  given.emplace_back("C", sub->add_option("--C", cfg.C, "subgaussian constant"));
  given.emplace_back("p", sub->add_option("--p", cfg.p, "edge probability / sign parameter"));
  given.emplace_back("K", sub->add_option("--K", cfg.K, "comparisons per pair"));
  given.emplace_back("colors", sub->add_option("--colors", cfg.colors, "color count (0 = n)"));
  given.emplace_back("dist", sub->add_option("--dist", cfg.dist, "distribution spec"));
  given.emplace_back("noise", sub->add_option("--noise", cfg.noise, "noise model spec"));
  given.emplace_back("order", sub->add_option("--order", cfg.order, "pick order, comma-separated"));
  given.emplace_back("out", sub->add_option("--out", cfg.out, "report path (default stdout)"));
  given.emplace_back("steps", sub->add_option("--steps", cfg.steps_out, "step-log CSV path"));
  given.emplace_back("dump-lp", sub->add_option("--dump-lp", cfg.dump_lp, "LP standard-form listing path"));
  sub->add_flag("--json", cfg.json, "emit a JSON report instead of CSV");
  sub->add_option("--config", opts.config_path, "key=value config file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairdiv: seeded Monte Carlo experiments for envy-minimizing "
               "allocation under inaccurate preferences"};
  app.require_subcommand(1);

  CliOptions opts;
  std::vector<std::pair<std::string, CLI::Option*>> given;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"rr", "picking allocator under bounded noise vs. its envy bound"},
      {"rr-lowerbound", "adversarial truth against the all-1/2 estimates"},
      {"welfare", "argmax-by-estimate allocation under stochastic values"},
      {"lp", "min-max-envy LP plus randomized rounding"},
      {"online-envy", "online allocation via the color-tree walk"},
      {"balance", "single signed-walk vector balancing"},
      {"multicolor", "k-color online discrepancy"},
      {"btl", "pairwise-comparison estimation feeding the picking allocator"},
      {"mhr", "sign-flipped light-tailed noise application"},
      {"verify-statcheck", "randomized exact-oracle battery"},
      {"verify-all", "full acceptance battery"},
  };
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    attach_options(sub, opts, given);
    sub->callback([&, name] { opts.cfg.command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.get_subcommands().at(0)->count("--seed") > 0) opts.cfg.seed_set = true;

    if (!opts.config_path.empty()) {
      std::ifstream in(opts.config_path);
      if (!in) throw fairdiv::error("cannot read config file '" + opts.config_path + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      // Flags win: skip every key the command line already set.
      std::vector<std::string> skip = {"subcommand", "command"};
      auto* sub = app.get_subcommands().at(0);
      for (const auto& [key, opt] : given)
        if (opt->count() > 0) skip.push_back(key);
      (void)sub;
      fairdiv::ExperimentConfig merged = opts.cfg;
      merged.command = opts.cfg.command;
      fairdiv::apply_config_text(merged, buffer.str(), skip);
      opts.cfg = merged;
    }

    opts.cfg.validate();
    const bool hard_ok = fairdiv::execute_and_write(opts.cfg, std::cout);
    return hard_ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "fairdiv: " << e.what() << "\n";
    return 2;
  }
}
