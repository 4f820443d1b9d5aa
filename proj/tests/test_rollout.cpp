#include <vector>

#include "doctest.h"
#include "maskrl/envs/inventory.hpp"
#include "maskrl/rollout.hpp"

using namespace maskrl;

namespace {

// fixed-parameter stand-in for the learned policy
struct StubPolicy {
  int n_actions;
  Eigen::VectorXd logits(const Eigen::VectorXd& obs) const {
    Eigen::VectorXd l(n_actions);
    for (int a = 0; a < n_actions; ++a) l[a] = 0.1 * a + 0.01 * obs[0];
    return l;
  }
  double value(const Eigen::VectorXd& obs) const { return 0.5 * obs[0]; }
};

inv::Config short_episode_config() {
  inv::Config cfg;
  cfg.pipeline = 2;
  cfg.lambda = 2.0;
  cfg.levels = 4;
  cfg.horizon = 7;
  return cfg;
}

}  // namespace

TEST_CASE("rollout slices have exact length and consistent bookkeeping") {
  inv::Env env(short_episode_config());
  StubPolicy policy{env.action_count()};
  const Mask<inv::State> mask = allow_all<inv::State>(env.action_count());
  const Mask<inv::State> fallback = env.validity_mask();

  RolloutCursor cur;
  cur.env_root_seed = 123;
  Rng action_rng(9);
  Trajectory traj = run_rollout(env, policy, mask, fallback, 20, cur, action_rng);

  CHECK(traj.steps() == 20);
  CHECK(traj.observations.cols() == 20);
  CHECK(traj.actions.size() == 20);
  CHECK(traj.masks.size() == 20);
  CHECK(traj.rewards.size() == 20);
  CHECK(traj.values.size() == 20);
  CHECK(traj.log_probs.size() == 20);
  CHECK(traj.dones.size() == 20);

  // horizon-7 episodes packed back to back: done at t = 6 and 13
  for (int t = 0; t < 20; ++t)
    CHECK(traj.dones[t] == ((t == 6 || t == 13) ? 1 : 0));
  CHECK(traj.finished_returns.size() == 2);

  // finished returns are the reward sums of their episodes
  double r0 = 0.0, r1 = 0.0;
  for (int t = 0; t <= 6; ++t) r0 += traj.rewards[t];
  for (int t = 7; t <= 13; ++t) r1 += traj.rewards[t];
  CHECK(traj.finished_returns[0] == doctest::Approx(r0).epsilon(1e-12));
  CHECK(traj.finished_returns[1] == doctest::Approx(r1).epsilon(1e-12));

  // the slice cut episode 3 mid-flight
  CHECK(cur.in_episode);
  CHECK(cur.episode_counter == 3);
  CHECK(traj.tail_value == doctest::Approx(policy.value(cur.obs)).epsilon(1e-12));

  // every recorded action is admissible under its own recorded row
  for (int t = 0; t < 20; ++t) {
    CHECK(traj.masks[t].any());
    CHECK(traj.masks[t].allowed(traj.actions[t]));
    CHECK(std::isfinite(traj.log_probs[t]));
    CHECK(traj.log_probs[t] <= 0.0);
  }
}

TEST_CASE("a terminal final transition zeroes the tail value") {
  inv::Env env(short_episode_config());
  StubPolicy policy{env.action_count()};
  const Mask<inv::State> mask = allow_all<inv::State>(env.action_count());
  const Mask<inv::State> fallback = env.validity_mask();

  RolloutCursor cur;
  cur.env_root_seed = 123;
  Rng action_rng(9);
  Trajectory traj = run_rollout(env, policy, mask, fallback, 14, cur, action_rng);
  CHECK(traj.dones[13] == 1);
  CHECK(traj.tail_value == 0.0);
  CHECK(!cur.in_episode);
}

TEST_CASE("slicing does not change the underlying stream") {
  const Mask<inv::State> mask = allow_all<inv::State>(4);

  auto collect = [&](const std::vector<int>& slice_sizes) {
    inv::Env env(short_episode_config());
    StubPolicy policy{env.action_count()};
    const Mask<inv::State> fallback = env.validity_mask();
    RolloutCursor cur;
    cur.env_root_seed = 321;
    Rng action_rng(5);
    std::vector<double> rewards;
    std::vector<int> actions;
    for (int n : slice_sizes) {
      Trajectory t = run_rollout(env, policy, mask, fallback, n, cur, action_rng);
      rewards.insert(rewards.end(), t.rewards.begin(), t.rewards.end());
      actions.insert(actions.end(), t.actions.begin(), t.actions.end());
    }
    return std::pair(rewards, actions);
  };

  // episode k always runs on its derived seed, so slicing is invisible
  const auto whole = collect({20});
  const auto split = collect({7, 7, 6});
  CHECK(whole.first == split.first);
  CHECK(whole.second == split.second);
}

TEST_CASE("rollouts are reproducible") {
  auto run = [] {
    inv::Env env(short_episode_config());
    StubPolicy policy{env.action_count()};
    const Mask<inv::State> mask = allow_all<inv::State>(env.action_count());
    const Mask<inv::State> fallback = env.validity_mask();
    RolloutCursor cur;
    cur.env_root_seed = 77;
    Rng action_rng(3);
    return run_rollout(env, policy, mask, fallback, 25, cur, action_rng);
  };
  const Trajectory a = run();
  const Trajectory b = run();
  CHECK(a.actions == b.actions);
  CHECK(a.rewards == b.rewards);
  CHECK((a.observations - b.observations).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.tail_value == b.tail_value);
}

TEST_CASE("restrictive masks bind the sampled actions") {
  inv::Env env(short_episode_config());
  StubPolicy policy{env.action_count()};
  // only action 2 admissible anywhere
  const Mask<inv::State> mask{"only2", [](const inv::State&) {
                                return ActionMask::single(4, 2);
                              }};
  const Mask<inv::State> fallback = env.validity_mask();
  RolloutCursor cur;
  cur.env_root_seed = 55;
  Rng action_rng(1);
  Trajectory traj = run_rollout(env, policy, mask, fallback, 30, cur, action_rng);
  for (int t = 0; t < 30; ++t) {
    CHECK(traj.actions[t] == 2);
    CHECK(traj.masks[t] == ActionMask::single(4, 2));
    CHECK(traj.log_probs[t] == 0.0);  // the only admissible action
  }
  CHECK(traj.fallback_events == 0);
}

TEST_CASE("an empty mask stack falls back to the validity mask") {
  inv::Env env(short_episode_config());
  StubPolicy policy{env.action_count()};
  const Mask<inv::State> empty{"none-admissible", [](const inv::State&) {
                                 return ActionMask::none(4);
                               }};
  const Mask<inv::State> fallback = env.validity_mask();
  RolloutCursor cur;
  cur.env_root_seed = 55;
  Rng action_rng(1);
  Trajectory traj = run_rollout(env, policy, empty, fallback, 10, cur, action_rng);
  CHECK(traj.fallback_events == 10);
  for (int t = 0; t < 10; ++t) {
    // the recorded row is the effective set, not the empty stack output
    CHECK(traj.masks[t] == ActionMask::all(4));
  }
}
