#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_common(CLI::App* sub, changeprop::cli::Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "experiment config (key = value)");
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "master seed (overrides the config)");
  sub->add_option("--threads", c.threads, "worker threads; 0 = all cores")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "output file (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace changeprop::cli;
  CLI::App app{"changeprop: quickest detection of changes propagating across a sensor array"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");  // frees -h for dp-solve --h

  Common common;
  DpFlags dp;

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo P_FA / E_DD curves as CSV");
  add_common(sweep, common, true);

  auto* solve = app.add_subcommand("dp-solve", "finite-horizon DP on the belief simplex (L <= 2)");
  add_common(solve, common, false);
  solve->add_option("--L", dp.sensors, "sensor count (1 or 2)");
  solve->add_option("--rho", dp.rho, "disruption parameter rho_{0,1}");
  solve->add_option("--rho12", dp.rho12, "propagation parameter rho_{1,2}");
  solve->add_option("--theta", dp.theta, "post-change mean shift");
  solve->add_option("--c", dp.c, "cost per unit delay")->capture_default_str();
  solve->add_option("--h", dp.h, "grid step")->capture_default_str();
  solve->add_option("--T", dp.T, "horizon (default 20 * ceil(1/c), at most 400)");
  solve->add_option("--probes", dp.probes, "concavity probes")->capture_default_str();

  auto* check = app.add_subcommand("check", "contributor condition, slopes, lower bounds and l* as JSON");
  add_common(check, common, true);

  auto* self = app.add_subcommand("selftest", "recursion vs enumeration oracle suite");
  add_common(self, common, false);

  CLI11_PARSE(app, argc, argv);

  return guarded(
      [&] {
        if (*sweep) return cmd_sweep(common, std::cout);
        if (*solve) return cmd_dp(dp, common, std::cout);
        if (*check) return cmd_check(common, std::cout);
        return cmd_selftest(common, std::cout);
      },
      std::cerr);
}
