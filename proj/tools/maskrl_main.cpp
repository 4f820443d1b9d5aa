// Experiment harness: train masked PPO policies on the shipped environments,
// evaluate them, and compare against the non-learning baselines and exact
// oracles. Exit codes: 0 success, 1 user error (config, missing files),
// 2 internal error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maskrl/exp/runner.hpp"
#include "maskrl/version.hpp"

namespace {

maskrl::exp::ExperimentConfig load(const std::string& path) {
  return maskrl::exp::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masked-PPO experiment harness"};
  app.set_version_flag("--version", std::string("maskrl ") + maskrl::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  maskrl::exp::RunOptions opt;
  bool ignore_hash = false;
  std::vector<std::string> curve_inputs;
  std::string curve_output = "curves.csv";

  CLI::App* train = app.add_subcommand("train", "train one policy per seed");
  train->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();
  train->add_option("-j,--jobs", opt.jobs, "parallel training runs (default: cores)");
  train->add_flag("-q,--quiet", opt.quiet, "suppress progress output");

  CLI::App* eval = app.add_subcommand("eval", "evaluate stored checkpoints");
  eval->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();
  eval->add_flag("--ignore-hash", ignore_hash,
                 "evaluate checkpoints from a different configuration");

  CLI::App* baseline =
      app.add_subcommand("baseline", "run the non-learning baseline");
  baseline->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact optimum for small instances (paintshop, inventory)");
  oracle->add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();

  CLI::App* curves = app.add_subcommand("curves", "merge learning-curve CSVs");
  curves->add_option("inputs", curve_inputs, "curve CSV files")->required();
  curves->add_option("-o,--output", curve_output, "merged output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) maskrl::exp::cmd_train(load(config_path), opt);
    if (eval->parsed()) maskrl::exp::cmd_eval(load(config_path), ignore_hash);
    if (baseline->parsed()) maskrl::exp::cmd_baseline(load(config_path));
    if (oracle->parsed()) maskrl::exp::cmd_oracle(load(config_path));
    if (curves->parsed()) maskrl::exp::cmd_curves(curve_inputs, curve_output);
  } catch (const maskrl::exp::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
