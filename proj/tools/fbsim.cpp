// fbsim: command-line front end for the filter-bubble simulator.
//
//   fbsim generate --preset desk --out data/
//   fbsim run      --config exp.ini --out out/baseline
//   fbsim aggregate --out out/agg out/baseline/runs/run_0 out/baseline/runs/run_1
//   fbsim report   --out out/figs out/baseline/aggregate.csv out/calibrated/aggregate.csv

#include <CLI11.hpp>

#include <iostream>

#include "fbsim/commands.hpp"

namespace {

void add_common(CLI::App* cmd, fbsim::CommandOptions& opts, std::string& config, std::uint64_t& seed) {
  cmd->add_option("--config", config, "Experiment config file (INI)");
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--seed", seed, "Seed override");
  cmd->add_option("--preset", opts.preset, "Base preset: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_flag("--dry-run", opts.dry_run, "Validate and print the resolved plan without executing");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop news recommender / filter-bubble simulator"};
  app.set_version_flag("--version", fbsim::kVersion);
  app.require_subcommand(1);

  fbsim::CommandOptions opts;
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;

  auto* gen = app.add_subcommand("generate", "Write a synthetic article corpus and user population");
  auto* run = app.add_subcommand("run", "Run the closed-loop experiment for every repeat");
  auto* agg = app.add_subcommand("aggregate", "Aggregate run directories into aggregate.csv");
  auto* rep = app.add_subcommand("report", "Export plot-ready CSVs from one or two aggregates");
  for (auto* cmd : {gen, run, agg, rep}) add_common(cmd, opts, config, seed);
  run->add_option("--threads", threads, "Worker threads for repeats")->check(CLI::PositiveNumber);
  agg->add_option("inputs", opts.inputs, "Run directories or run output roots")->required();
  rep->add_option("inputs", opts.inputs, "aggregate.csv (baseline) [aggregate.csv (calibrated)]")->required();

  CLI11_PARSE(app, argc, argv);

  if (!config.empty()) opts.config = config;
  for (auto* cmd : {gen, run, agg, rep}) {
    if (cmd->count("--seed")) opts.seed = seed;
  }
  if (threads > 0) opts.threads = threads;

  try {
    if (gen->parsed()) fbsim::cmd_generate(opts, std::cout);
    if (run->parsed()) fbsim::cmd_run(opts, std::cout);
    if (agg->parsed()) fbsim::cmd_aggregate(opts, std::cout);
    if (rep->parsed()) fbsim::cmd_report(opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "fbsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
