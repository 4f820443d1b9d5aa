#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "maskrl/mask.hpp"
#include "maskrl/ppo/mlp.hpp"
#include "maskrl/rollout.hpp"
#include "maskrl/trajectory.hpp"

namespace maskrl {

// Clipped-surrogate PPO on a masked categorical policy. Defaults follow the
// common on-policy baseline settings; the one deliberate difference is that
// advantages are standardized once over the whole rollout batch rather than
// per minibatch.
struct PpoConfig {
  int horizon = 2048;        // transitions per rollout slice
  int minibatch = 64;
  int epochs = 10;
  double lr = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double value_coef = 0.5;   // c1
  double entropy_coef = 0.0; // c2; the term is computed but inert at 0
  double max_grad_norm = 0.5;
  int hidden = 64;
};

struct PolicyBundle {
  Mlp actor;
  Mlp critic;
  Adam opt;

  PolicyBundle() = default;
  PolicyBundle(int obs_dim, int action_count, const PpoConfig& cfg,
               uint64_t root_seed);

  Eigen::VectorXd logits(const Eigen::VectorXd& obs) const {
    return actor.forward1(obs);
  }
  double value(const Eigen::VectorXd& obs) const {
    return critic.forward1(obs)[0];
  }
};

// Generalized advantage estimation over a rollout slice; bootstraps with
// traj.tail_value only when the slice cut a running episode, never across an
// episode boundary.
void gae(const Trajectory& traj, double gamma, double lambda,
         std::vector<double>& advantages, std::vector<double>& returns);

struct UpdateStats {
  double policy_loss = 0.0;   // averages over all minibatches
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;     // mean pre-clip norm
};

// One PPO update on a recorded slice. Distributions are rebuilt from the
// recorded admissible bitvectors, so the update sees exactly the sets the
// rollout sampled under. Throws std::runtime_error naming the offending term
// if any loss component turns non-finite.
UpdateStats ppo_update(PolicyBundle& policy, const Trajectory& traj,
                       const PpoConfig& cfg, Rng& shuffle_rng);

struct CurvePoint {
  long timesteps = 0;
  double mean_episode_reward = 0.0;  // over the trailing 100 finished episodes
};

struct TrainResult {
  PolicyBundle policy;
  std::vector<CurvePoint> curve;
  long timesteps = 0;
  long episodes = 0;
  long fallback_events = 0;
};

struct TrainHooks {
  // called after every update; return false to stop early
  std::function<bool(const CurvePoint&, const UpdateStats&)> on_update;
};

// Full training loop: alternate rollout and update until at least
// `total_timesteps` transitions were consumed (the last slice may overshoot
// by less than one horizon). Everything stochastic derives from root_seed.
template <class E>
TrainResult train(E& env, const Mask<typename E::State>& mask,
                  const PpoConfig& cfg, long total_timesteps,
                  uint64_t root_seed, const TrainHooks& hooks = {}) {
  TrainResult result;
  result.policy = PolicyBundle(env.observation_dim(), env.action_count(), cfg,
                               root_seed);

  const Mask<typename E::State> fallback = env.validity_mask();
  RolloutCursor cursor;
  cursor.env_root_seed = root_seed;
  Rng action_rng(derive_seed(root_seed, Stream::kActionSample, 0));
  Rng shuffle_rng(derive_seed(root_seed, Stream::kShuffle, 0));

  std::deque<double> recent_returns;
  while (result.timesteps < total_timesteps) {
    Trajectory traj = run_rollout(env, result.policy, mask, fallback,
                                  cfg.horizon, cursor, action_rng);
    result.timesteps += traj.steps();
    result.fallback_events += traj.fallback_events;
    result.episodes += static_cast<long>(traj.finished_returns.size());
    for (double r : traj.finished_returns) {
      recent_returns.push_back(r);
      if (recent_returns.size() > 100) recent_returns.pop_front();
    }

    const UpdateStats stats = ppo_update(result.policy, traj, cfg, shuffle_rng);

    if (!recent_returns.empty()) {
      double mean = 0.0;
      for (double r : recent_returns) mean += r;
      mean /= static_cast<double>(recent_returns.size());
      result.curve.push_back({result.timesteps, mean});
      if (hooks.on_update && !hooks.on_update(result.curve.back(), stats)) break;
    } else if (hooks.on_update &&
               !hooks.on_update({result.timesteps, 0.0}, stats)) {
      break;
    }
  }
  return result;
}

// Binary checkpoint of weights and optimizer state. The config hash ties a
// checkpoint to the experiment that produced it; load refuses dimension
// mismatches and, unless `ignore_hash`, hash mismatches.
void save_checkpoint(const std::string& path, const PolicyBundle& policy,
                     uint64_t config_hash);
PolicyBundle load_checkpoint(const std::string& path, uint64_t expected_hash,
                             bool ignore_hash = false);

}  // namespace maskrl
