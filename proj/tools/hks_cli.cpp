#include <CLI11.hpp>

#include <iostream>

#include "hks/harness/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral hyperbolic Keller-Segel simulator"};
  app.require_subcommand(1);

  hks::harness::CommandOptions opt;
  std::string config, out;
  int parallel = 0;
  std::uint64_t seed = 0;
  double constant_C = 0.0;
  int iters = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,config", config, "Configuration file")->required();
    sub->add_option("--out", out, "Output directory (overrides the config and HKS_OUT_DIR)");
    sub->add_option("--seed", seed, "Seed for the random initial-data preset");
    sub->add_option("--constant-C", constant_C, "Universal constant used by the theory oracles");
  };
  auto* run = app.add_subcommand("run", "Integrate one configuration");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Run every combination of a sweep file");
  add_common(sweep);
  sweep->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check", "Evaluate the theory oracles without simulating");
  add_common(check);
  auto* friedrichs = app.add_subcommand("friedrichs", "Compare Friedrichs iterates with a direct solve");
  add_common(friedrichs);
  friedrichs->add_option("--iters", iters, "Number of iterates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hks::harness::exit_code::config_error;
  }

  opt.config = config;
  for (auto* sub : {run, sweep, check, friedrichs}) {
    if (sub->count("--out")) opt.out = out;
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--constant-C")) opt.constant_C = constant_C;
  }
  if (sweep->count("--parallel")) opt.parallel = parallel;
  if (friedrichs->count("--iters")) opt.iters = iters;

  try {
    if (*run) return hks::harness::cli_run(opt);
    if (*sweep) return hks::harness::cli_sweep(opt);
    if (*check) return hks::harness::cli_check(opt);
    return hks::harness::cli_friedrichs(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
