#include "maskrl/envs/inventory.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace maskrl::inv {

Env::Env(Config cfg) : cfg_(cfg) {
  assert(cfg_.pipeline >= 1);
  assert(cfg_.levels >= 1 && cfg_.levels <= ActionMask::kMaxActions);
  assert(cfg_.quantum >= 1);
  assert(cfg_.lambda >= 0.0);
  assert(cfg_.horizon >= 1);
}

Eigen::VectorXd Env::reset(uint64_t seed) {
  rng_ = Rng(seed);
  s_ = State{};
  s_.pipeline.assign(cfg_.pipeline, 0);
  return encode();
}

StepOutcome Env::step(int action) {
  assert(action >= 0 && action < cfg_.levels);
  const int order = cfg_.order_quantity(action);

  // 1. the head of the pipeline arrives, everything else moves up one slot
  const int available = s_.inventory + s_.pipeline[0];
  for (int i = 0; i + 1 < cfg_.pipeline; ++i) s_.pipeline[i] = s_.pipeline[i + 1];
  s_.pipeline[cfg_.pipeline - 1] = 0;

  // 2. demand; holding cost on what remains, penalty on what was lost
  const int demand = rng_.poisson(cfg_.lambda);
  const int delta = available - demand;
  const double reward =
      delta >= 0 ? -cfg_.holding_cost * delta : cfg_.penalty * delta;
  s_.inventory = std::max(delta, 0);

  // 3. the new order enters the pipeline; the lead-time draw happens every
  // step (also for order 0) so random streams do not depend on the policy
  const int lead =
      cfg_.stochastic_lead ? rng_.uniform_int(1, cfg_.pipeline) : cfg_.pipeline;
  s_.pipeline[lead - 1] += order;  // simultaneous arrivals merge

  ++s_.t;

  StepOutcome out;
  out.reward = reward;
  out.done = s_.t >= cfg_.horizon;
  out.observation = encode();
  out.info = {{"lost_sales", delta < 0 ? static_cast<double>(-delta) : 0.0},
              {"on_hand", static_cast<double>(s_.inventory)},
              {"demand", static_cast<double>(demand)}};
  return out;
}

Eigen::VectorXd Env::encode() const {
  Eigen::VectorXd obs(cfg_.observation_dim());
  // Stock near the order quantum times ten maps to O(1) network inputs.
  const double scale = 1.0 / (10.0 * cfg_.quantum);
  obs[0] = s_.inventory * scale;
  for (int i = 0; i < cfg_.pipeline; ++i) obs[1 + i] = s_.pipeline[i] * scale;
  return obs;
}

Mask<State> Env::validity_mask() const {
  return allow_all<State>(cfg_.levels);
}

double base_stock_target(const State& s, double S) {
  return S - s.position();
}

int base_stock_action(const State& s, double S, const Config& cfg) {
  const double clamped = std::clamp(base_stock_target(s, S), 0.0,
                                    static_cast<double>(cfg.max_order()));
  int best = 0;
  double best_dist = std::abs(cfg.order_quantity(0) - clamped);
  for (int a = 1; a < cfg.levels; ++a) {
    const double dist = std::abs(cfg.order_quantity(a) - clamped);
    if (dist < best_dist) {  // strict: the lower action wins ties
      best = a;
      best_dist = dist;
    }
  }
  return best;
}

namespace {

// shared fallback: when a formula-built mask admits nothing, admit exactly
// the grid action nearest the clamped prescription
Mask<State> or_nearest(Mask<State> inner, double S, const Config& cfg) {
  return {inner.name, [inner = std::move(inner.eval), S, cfg](const State& s) {
            const ActionMask m = inner(s);
            if (m.any()) return m;
            return ActionMask::single(cfg.levels, base_stock_action(s, S, cfg));
          }};
}

}  // namespace

Mask<State> interval_mask(double S, const Config& cfg) {
  auto inner = heuristic_distance<State>(
      "int", cfg.levels, [S](const State& s) { return base_stock_target(s, S); },
      [cfg](int a) { return static_cast<double>(cfg.order_quantity(a)); },
      static_cast<double>(cfg.quantum));
  return or_nearest(std::move(inner), S, cfg);
}

Mask<State> threshold_mask(double S, const Config& cfg) {
  auto inner = heuristic_threshold<State>(
      "thr", cfg.levels, [S](const State& s) { return base_stock_target(s, S); },
      [cfg](int a) { return static_cast<double>(cfg.order_quantity(a)); },
      Bound::kAtLeast);
  return or_nearest(std::move(inner), S, cfg);
}

SimSummary base_stock_simulate(const Config& cfg, double S, int episodes,
                               uint64_t seed) {
  Env env(cfg);
  return simulate_policy(
      env,
      [S, &cfg](const State& s, const Eigen::VectorXd&) {
        return base_stock_action(s, S, cfg);
      },
      episodes, seed);
}

}  // namespace maskrl::inv
