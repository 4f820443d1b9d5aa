#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "maskrl/env.hpp"
#include "maskrl/mask.hpp"
#include "maskrl/rng.hpp"

namespace maskrl::lms {

inline constexpr int kActionOn = 0;
inline constexpr int kActionOff = 1;

// Peak-load management over one day of 15-minute periods. The plant may
// switch off for a limited number of periods; a period spent off is exempt
// from the billed peak. Success means the realized peak stayed below the
// demand-charge threshold zeta, which is only possible if every period whose
// load reaches zeta is spent off. The controller sees a noisy forecast of the
// current period's load.
struct Config {
  std::vector<double> curve;  // exogenous load per period
  double sigma = 0.0;         // forecast noise std
  double zeta = 1.24;         // demand-charge threshold
  int off_budget = 3;

  int horizon() const { return static_cast<int>(curve.size()); }
};

// 96-period default profile: low overnight, a three-period midday peak block
// (the only loads >= zeta), moderate evening shoulder.
const std::vector<double>& default_curve();
std::vector<double> load_curve(const std::string& path);

struct State {
  int t = 0;
  double prev_load = 0.0;  // realized load of the previous period; c_0 at t=0
  double forecast = 0.0;   // noisy view of the current period's load
  int remaining_off = 0;
  double peak = 0.0;       // running billed peak over the periods spent on
};

class Env {
 public:
  using State = lms::State;

  explicit Env(Config cfg);

  int action_count() const { return 2; }
  int observation_dim() const { return 3; }
  const Config& config() const { return cfg_; }
  const State& state() const { return s_; }

  Eigen::VectorXd reset(uint64_t seed);
  StepOutcome step(int action);

  Eigen::VectorXd encode() const;
  Mask<State> validity_mask() const;  // both actions are always legal

 private:
  double clipped_forecast(double load);

  Config cfg_;
  State s_;
  Rng rng_{0};
};

// Switching off is admissible only when the forecast reaches theta; staying
// on is always admissible. theta = 0 never forbids anything (forecasts are
// clipped at 0).
Mask<State> forecast_threshold_mask(double theta);

// The episode outcome is the terminal reward: +1 when the billed peak stayed
// below zeta, -1 otherwise.
struct EvalSummary {
  double solved_fraction = 0.0;
  double mean_reward = 0.0;
};

// `act(state, obs) -> action` is the policy under test; episode k runs on
// derive_seed(seed, kEval, k), so evaluations pair across configurations.
template <class ActFn>
EvalSummary evaluate(Env& env, ActFn&& act, int episodes, uint64_t seed) {
  EvalSummary sum;
  for (int k = 0; k < episodes; ++k) {
    Eigen::VectorXd obs = env.reset(derive_seed(seed, Stream::kEval, k));
    bool done = false;
    double last_reward = 0.0;
    while (!done) {
      const StepOutcome out = env.step(act(env.state(), obs));
      obs = out.observation;
      done = out.done;
      last_reward = out.reward;
    }
    if (last_reward > 0.0) sum.solved_fraction += 1.0;
    sum.mean_reward += last_reward;
  }
  sum.solved_fraction /= episodes;
  sum.mean_reward /= episodes;
  return sum;
}

}  // namespace maskrl::lms
