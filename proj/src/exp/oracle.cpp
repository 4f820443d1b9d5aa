#include "maskrl/exp/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace maskrl::exp {

namespace {

struct PsSearch {
  const ps::Config& cfg;
  const std::vector<int>& instance;
  Mask<ps::State> mask;
  long state_budget;
  long visited = 0;

  using Key = std::tuple<std::vector<std::vector<int>>, int, int>;
  std::map<Key, int> memo;

  // lanes are interchangeable: canonicalizing to a sorted multiset collapses
  // permutation-equivalent states; masks and costs are permutation-symmetric
  Key key(const ps::State& s) const {
    std::vector<std::vector<int>> lanes = s.lanes;
    std::sort(lanes.begin(), lanes.end());
    return {std::move(lanes), s.next, s.current_color};
  }

  int solve(const ps::State& s) {
    const int total = static_cast<int>(instance.size());
    if (s.retrieved == total) return 0;

    const Key k = key(s);
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    if (++visited > state_budget)
      throw std::runtime_error(
          "paint-shop oracle: state budget exhausted; instance too large");

    const ActionMask admissible = mask(s);
    int best = std::numeric_limits<int>::max();
    for (int a = 0; a < cfg.action_count(); ++a) {
      if (!admissible.allowed(a)) continue;
      ps::State next = s;
      const ps::StepEffect e = ps::apply(next, a, cfg);
      if (e.invalid) continue;  // never useful: same state, a wasted step
      const int togo = solve(next);
      if (togo == std::numeric_limits<int>::max()) continue;
      best = std::min(best, (e.color_change ? 1 : 0) + togo);
    }
    // a complete episode is always reachable: any valid action sequence that
    // keeps retrieving terminates, and the mask stacks keep a valid action
    // available whenever one exists
    memo[k] = best;
    return best;
  }
};

}  // namespace

PsOracleResult ps_optimal_changes(const std::vector<int>& instance,
                                  const ps::Config& cfg,
                                  const std::string& level, long state_budget) {
  assert(static_cast<int>(instance.size()) == cfg.sequence_length);
  // the search never plays invalid moves, so "none" means "all valid"
  const std::string effective = level == "none" ? "inv" : level;
  PsSearch search{cfg, instance, ps::combined_mask(effective, cfg),
                  state_budget};

  ps::State s;
  s.lanes.assign(cfg.lanes, {});
  s.incoming = instance;

  PsOracleResult res;
  res.optimal_changes = search.solve(s);
  if (res.optimal_changes == std::numeric_limits<int>::max())
    throw std::runtime_error(
        "paint-shop oracle: no complete episode admissible under level " +
        level);
  res.states_visited = search.visited;
  return res;
}

InvDp::InvDp(const inv::Config& cfg, int horizon, int demand_cap)
    : cfg_(cfg), horizon_(horizon) {
  if (cfg_.pipeline != 1 || cfg_.stochastic_lead)
    throw std::runtime_error(
        "inventory DP supports pipeline == 1 with deterministic lead only");
  if (horizon_ < 1) throw std::runtime_error("inventory DP: horizon must be >= 1");

  // truncated Poisson with the tail lumped at the cap, so the pmf sums to 1
  pmf_.assign(demand_cap + 1, 0.0);
  double p = std::exp(-cfg_.lambda);
  double acc = 0.0;
  for (int k = 0; k < demand_cap; ++k) {
    pmf_[k] = p;
    acc += p;
    p *= cfg_.lambda / (k + 1);
  }
  pmf_[demand_cap] = std::max(0.0, 1.0 - acc);
}

double InvDp::q_value(int t, int on_hand, int on_order, int action) {
  const int order = cfg_.order_quantity(action);
  const int available = on_hand + on_order;
  double total = 0.0;
  for (int d = 0; d < static_cast<int>(pmf_.size()); ++d) {
    if (pmf_[d] == 0.0) continue;
    const int delta = available - d;
    const double cost = delta >= 0 ? cfg_.holding_cost * delta
                                   : -cfg_.penalty * delta;
    total += pmf_[d] * (cost + value(t + 1, std::max(delta, 0), order));
  }
  return total;
}

double InvDp::value(int t, int on_hand, int on_order) {
  if (t >= horizon_) return 0.0;
  const auto k = std::make_tuple(t, on_hand, on_order);
  if (auto it = memo_.find(k); it != memo_.end()) return it->second;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < cfg_.levels; ++a)
    best = std::min(best, q_value(t, on_hand, on_order, a));
  memo_[k] = best;
  return best;
}

bool InvDp::is_optimal(int t, int on_hand, int on_order, int action,
                       double tol) {
  return q_value(t, on_hand, on_order, action) <=
         value(t, on_hand, on_order) + tol;
}

}  // namespace maskrl::exp
