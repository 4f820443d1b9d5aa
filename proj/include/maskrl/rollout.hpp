#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "maskrl/env.hpp"
#include "maskrl/mask.hpp"
#include "maskrl/masked_dist.hpp"
#include "maskrl/rng.hpp"
#include "maskrl/trajectory.hpp"

namespace maskrl {

// Episode bookkeeping carried across successive rollout slices, so an episode
// longer than one slice continues where it stopped. Episode k always runs on
// derive_seed(env_root_seed, kEnvEpisode, k) regardless of slicing.
struct RolloutCursor {
  uint64_t env_root_seed = 0;
  uint64_t episode_counter = 0;
  bool in_episode = false;
  Eigen::VectorXd obs;
  double episode_return = 0.0;
};

// Collects exactly `n_steps` transitions. `policy` needs
//   Eigen::VectorXd logits(const Eigen::VectorXd& obs)
//   double value(const Eigen::VectorXd& obs)
// Actions are sampled from the masked distribution; when the mask stack
// allows nothing the distribution falls back to `fallback` (the environment's
// validity mask) and the event is counted, never fatal. The recorded
// bitvector is the effective admissible set, so the recorded action is always
// marked admissible in its own row.
template <class E, class P>
Trajectory run_rollout(E& env, P& policy, const Mask<typename E::State>& mask,
                       const Mask<typename E::State>& fallback, int n_steps,
                       RolloutCursor& cur, Rng& action_rng) {
  Trajectory traj;
  traj.observations.resize(env.observation_dim(), n_steps);
  traj.actions.reserve(n_steps);
  traj.masks.reserve(n_steps);
  traj.rewards.reserve(n_steps);
  traj.values.reserve(n_steps);
  traj.log_probs.reserve(n_steps);
  traj.dones.reserve(n_steps);

  bool last_done = false;
  for (int t = 0; t < n_steps; ++t) {
    if (!cur.in_episode) {
      const uint64_t seed =
          derive_seed(cur.env_root_seed, Stream::kEnvEpisode, cur.episode_counter++);
      cur.obs = env.reset(seed);
      cur.episode_return = 0.0;
      cur.in_episode = true;
    }

    const ActionMask row = mask(env.state());
    const ActionMask fb = fallback(env.state());
    const Eigen::VectorXd logits = policy.logits(cur.obs);
    const MaskedDistribution dist =
        masked_distribution(logits, row, &fb, &traj.fallback_events);
    const int action = dist.sample(action_rng.uniform());

    traj.observations.col(t) = cur.obs;
    traj.actions.push_back(action);
    traj.masks.push_back(dist.admissible);
    traj.values.push_back(policy.value(cur.obs));
    traj.log_probs.push_back(dist.log_prob(action));

    const StepOutcome out = env.step(action);
    traj.rewards.push_back(out.reward);
    traj.dones.push_back(out.done ? 1 : 0);
    cur.episode_return += out.reward;
    last_done = out.done;

    if (out.done) {
      traj.finished_returns.push_back(cur.episode_return);
      cur.in_episode = false;
    } else {
      cur.obs = out.observation;
    }
  }

  traj.tail_value = last_done ? 0.0 : policy.value(cur.obs);
  return traj;
}

}  // namespace maskrl
