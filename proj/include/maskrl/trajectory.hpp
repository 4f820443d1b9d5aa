#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "maskrl/action_mask.hpp"

namespace maskrl {

// Fixed-length rollout slice used by the trainer. Episodes shorter than the
// slice are concatenated back to back (auto-reset); `dones[t]` marks that the
// transition at t ended its episode, so value bootstrapping never crosses an
// episode boundary. When the slice cuts a still-running episode, `tail_value`
// carries V(o_T) for the bootstrap; it is 0 when the last transition was
// terminal.
struct Trajectory {
  Eigen::MatrixXd observations;  // obs_dim x steps, column t = o_t
  std::vector<int> actions;
  std::vector<ActionMask> masks;  // effective admissible set at each step
  std::vector<double> rewards;
  std::vector<double> values;     // V(o_t) under the rollout policy
  std::vector<double> log_probs;  // log pi^m(a_t | o_t)
  std::vector<uint8_t> dones;
  double tail_value = 0.0;
  long fallback_events = 0;

  // undiscounted returns of the episodes that finished inside this slice
  std::vector<double> finished_returns;

  int steps() const { return static_cast<int>(actions.size()); }
};

}  // namespace maskrl
