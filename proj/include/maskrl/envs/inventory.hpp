#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "maskrl/env.hpp"
#include "maskrl/mask.hpp"
#include "maskrl/rng.hpp"

namespace maskrl::inv {

// Single-item lost-sales inventory control under Poisson demand with order
// lead times. Orders travel through a pipeline of N slots; slot i arrives in
// i+1 periods. Lead times are either deterministic (always N) or uniform on
// {1..N}, in which case two orders may land on the same slot and merge.
// Rewards are negated costs: linear holding on end-of-period stock, linear
// penalty on lost demand.
struct Config {
  int pipeline = 4;             // N
  bool stochastic_lead = false;
  double lambda = 5.0;          // Poisson demand rate
  double holding_cost = 1.0;    // per unit on hand at period end
  double penalty = 4.0;         // per unit of lost demand
  int levels = 11;              // order grid {0, q, 2q, ..., (levels-1) q}
  int quantum = 10;             // q
  int horizon = 5000;

  int action_count() const { return levels; }
  int observation_dim() const { return 1 + pipeline; }
  int order_quantity(int action) const { return action * quantum; }
  int max_order() const { return (levels - 1) * quantum; }
};

struct State {
  int inventory = 0;
  std::vector<int> pipeline;  // pipeline[i] arrives in i+1 periods
  int t = 0;

  int position() const {  // inventory plus everything in flight
    int p = inventory;
    for (int q : pipeline) p += q;
    return p;
  }
};

class Env {
 public:
  using State = inv::State;

  explicit Env(Config cfg);

  int action_count() const { return cfg_.action_count(); }
  int observation_dim() const { return cfg_.observation_dim(); }
  const Config& config() const { return cfg_; }
  const State& state() const { return s_; }

  Eigen::VectorXd reset(uint64_t seed);
  StepOutcome step(int action);

  Eigen::VectorXd encode() const;
  Mask<State> validity_mask() const;  // every grid order is always legal

 private:
  Config cfg_;
  State s_;
  Rng rng_{0};
};

// Order-up-to prescription: how much ordering now would bring the position to
// S. Real-valued and possibly off-grid or negative.
double base_stock_target(const State& s, double S);

// Grid action nearest to the prescription clamped into [0, max order]; the
// lower action wins ties.
int base_stock_action(const State& s, double S, const Config& cfg);

// Mask families around the base-stock heuristic. Both fall back to exactly
// the nearest-grid action when their formula admits nothing, so they are
// never empty.
Mask<State> interval_mask(double S, const Config& cfg);   // |order - target| <= q
Mask<State> threshold_mask(double S, const Config& cfg);  // order >= target

struct SimSummary {
  double mean_cost_per_step = 0.0;
  double std_error = 0.0;  // of the per-episode mean cost
  std::vector<double> episode_costs;
};

// Cost of the base-stock policy itself, by simulation. Episode k runs on
// derive_seed(seed, kEval, k); with the same seed and config an RL evaluation
// faces identical demand and lead-time streams.
SimSummary base_stock_simulate(const Config& cfg, double S, int episodes,
                               uint64_t seed);

// Mean cost per step of `act(state, obs) -> action` over paired episodes.
template <class ActFn>
SimSummary simulate_policy(Env& env, ActFn&& act, int episodes, uint64_t seed) {
  SimSummary sum;
  const int horizon = env.config().horizon;
  for (int k = 0; k < episodes; ++k) {
    Eigen::VectorXd obs = env.reset(derive_seed(seed, Stream::kEval, k));
    double total = 0.0;
    bool done = false;
    while (!done) {
      const StepOutcome out = env.step(act(env.state(), obs));
      obs = out.observation;
      total += out.reward;
      done = out.done;
    }
    sum.episode_costs.push_back(-total / horizon);
  }
  double mean = 0.0;
  for (double c : sum.episode_costs) mean += c;
  mean /= sum.episode_costs.size();
  double var = 0.0;
  for (double c : sum.episode_costs) var += (c - mean) * (c - mean);
  const size_t n = sum.episode_costs.size();
  sum.mean_cost_per_step = mean;
  sum.std_error = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
  return sum;
}

}  // namespace maskrl::inv
