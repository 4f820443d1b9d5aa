#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "maskrl/envs/inventory.hpp"
#include "maskrl/envs/paintshop.hpp"

namespace maskrl::exp {

// Minimal color changes over complete episodes of one instance, searching
// only actions the given mask level admits ("none" searches all valid
// actions; invalid moves never help and only stall). Memoized exhaustive DFS
// over lane-multiset states; feasible for toy geometries only, guarded by a
// state budget.
struct PsOracleResult {
  int optimal_changes = 0;
  long states_visited = 0;
};
PsOracleResult ps_optimal_changes(const std::vector<int>& instance,
                                  const ps::Config& cfg,
                                  const std::string& level,
                                  long state_budget = 20'000'000);

// Exact finite-horizon value iteration for the single-slot-pipeline
// (pipeline == 1, deterministic lead) inventory instance, demand truncated at
// demand_cap with the tail mass lumped there. Costs match the environment's
// negated rewards.
class InvDp {
 public:
  InvDp(const inv::Config& cfg, int horizon, int demand_cap);

  // expected total cost from (inventory, on-order) at period t
  double value(int t, int on_hand, int on_order);
  // expected total cost of taking `action` at t and playing optimally after
  double q_value(int t, int on_hand, int on_order, int action);
  // true when `action` attains the minimum at (t, state) within `tol`
  bool is_optimal(int t, int on_hand, int on_order, int action,
                  double tol = 1e-9);

  const std::vector<double>& demand_pmf() const { return pmf_; }

 private:
  inv::Config cfg_;
  int horizon_;
  std::vector<double> pmf_;
  std::map<std::tuple<int, int, int>, double> memo_;
};

}  // namespace maskrl::exp
