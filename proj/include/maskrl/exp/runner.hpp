#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskrl/exp/config.hpp"
#include "maskrl/ppo/ppo.hpp"

namespace maskrl::exp {

struct RunOptions {
  int jobs = 0;       // 0: one worker per hardware thread
  bool quiet = false; // suppress progress lines on stderr
};

// Mask construction for each environment, shared by training, evaluation and
// the python bindings. Evaluation masks differ in one respect: a paint-shop
// policy trained maskless would wander forever at evaluation, so "none" is
// evaluated under the validity mask; every other level evaluates as trained.
Mask<ps::State> ps_mask(const ExperimentConfig& cfg);
Mask<lms::State> lms_mask(const ExperimentConfig& cfg);
Mask<inv::State> inv_mask(const ExperimentConfig& cfg);
std::string ps_eval_level(const std::string& train_level);

struct PsEvalResult {
  double mean_color_changes = 0.0;
  double mean_reward = 0.0;
  double completed_fraction = 0.0;
  std::vector<int> per_episode_changes;
};
PsEvalResult ps_evaluate_policy(const ExperimentConfig& cfg,
                                const PolicyBundle& policy);
PsEvalResult ps_evaluate_greedy(const ExperimentConfig& cfg);

lms::EvalSummary lms_evaluate_policy(const ExperimentConfig& cfg,
                                     const PolicyBundle& policy);
lms::EvalSummary lms_evaluate_rule(const ExperimentConfig& cfg);

inv::SimSummary inv_evaluate_policy(const ExperimentConfig& cfg,
                                    const PolicyBundle& policy);

// One complete training run (rollouts, updates, learning curve), without any
// file output. Seed-indexed artifacts are the caller's concern.
TrainResult train_one(const ExperimentConfig& cfg, uint64_t seed,
                      bool quiet = true);

// Subcommand drivers. All artifact files land in resolve_output_dir(cfg):
//   config.json              resolved canonical configuration
//   curve_seed<K>.csv        learning curve of seed K
//   policy_seed<K>.ckpt      trained policy of seed K
//   eval.csv                 one row per seed plus a mean row
//   baseline.csv, oracle.csv
// They throw UserError for user-fixable problems; other exceptions are
// internal errors.
void cmd_train(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_eval(const ExperimentConfig& cfg, bool ignore_hash);
void cmd_baseline(const ExperimentConfig& cfg);
void cmd_oracle(const ExperimentConfig& cfg);
void cmd_curves(const std::vector<std::string>& inputs,
                const std::string& output);

}  // namespace maskrl::exp
