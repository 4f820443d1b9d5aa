#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "maskrl/envs/inventory.hpp"
#include "maskrl/envs/lms.hpp"
#include "maskrl/envs/paintshop.hpp"
#include "maskrl/ppo/ppo.hpp"

namespace maskrl::exp {

// User-fixable problems: malformed config, missing files, mismatched
// checkpoints. The CLI maps these to exit code 1; anything else is internal
// and maps to 2.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One experiment = one environment, one mask choice, a seed list, and the
// training/evaluation budget. Parsed from a JSON file with strict key
// checking: an unknown or ill-typed field fails with a diagnostic naming its
// path. Defaults are materialized before hashing, so the hash identifies the
// fully resolved configuration.
struct LmsSection {
  double sigma = 0.0;
  double theta = 0.0;   // admissibility threshold of the off action
  double zeta = 1.24;
  int off_budget = 3;
  std::string curve_file;  // empty: use the built-in default profile
};

struct InvSection {
  int pipeline = 4;
  bool stochastic_lead = false;
  double lambda = 5.0;
  double holding_cost = 1.0;
  double penalty = 4.0;
  int levels = 11;
  int quantum = 10;
  int horizon = 5000;
  double base_stock = 18.0;  // S for the masks and the baseline
};

struct OracleSection {
  int instances = 20;          // paint shop: evaluation instances to solve
  std::string level = "all";   // paint shop: mask restricting the search
  int horizon = 20;            // inventory: DP horizon
  int demand_cap = 12;         // inventory: demand truncation point
};

struct ExperimentConfig {
  std::string environment;  // "paintshop" | "lms" | "inventory"
  // paintshop: none|inv|inv+gr|inv+gr+ft|all; lms: none|threshold;
  // inventory: none|int|thr
  std::string mask = "none";
  std::vector<uint64_t> seeds = {0};
  long total_timesteps = 1'000'000;
  int eval_episodes = 100;
  uint64_t eval_seed = 9000;  // fixed across mask arms: evaluations pair up
  std::string output_dir = "runs/out";

  ps::Config paintshop;
  LmsSection lms;
  InvSection inventory;
  OracleSection oracle;
  PpoConfig ppo;

  // canonical serialized form (sorted keys, no insignificant whitespace)
  std::string canonical() const;
  uint64_t hash() const;  // FNV-1a over canonical()

  lms::Config lms_config() const;  // resolves curve_file
  inv::Config inv_config() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// resolves against the MASKRL_OUT environment variable when set and the
// configured path is relative
std::string resolve_output_dir(const ExperimentConfig& cfg);

uint64_t fnv1a64(const std::string& data);
std::string hash_hex(uint64_t h);

}  // namespace maskrl::exp
