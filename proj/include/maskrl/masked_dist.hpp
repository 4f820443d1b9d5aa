#pragma once

#include <Eigen/Core>

#include "maskrl/action_mask.hpp"

namespace maskrl {

// Categorical distribution over actions in which forbidden entries carry
// exactly zero probability and contribute exactly zero gradient. Forbidden
// logits are replaced by a sentinel low enough that exp() underflows to 0
// after max-subtraction; the probabilities of the surviving actions are the
// softmax of their unchanged logits, i.e. the restriction renormalizes.
struct MaskedDistribution {
  Eigen::VectorXd probs;       // forbidden entries exactly 0
  Eigen::VectorXd shifted;     // sentineled logits minus the admissible max
  double log_norm = 0.0;       // log sum exp(shifted)
  ActionMask admissible;       // effective set, after any fallback
  bool fallback_used = false;

  double log_prob(int a) const { return shifted[a] - log_norm; }

  // -sum p log p with the 0 log 0 := 0 convention
  double entropy() const;

  // u in [0,1): CDF walk; always lands on an admissible action
  int sample(double u) const;

  // highest-probability admissible action, lowest index on ties
  int argmax() const;

  // d log p(a) / d logits_j = [j == a] - p_j; exactly 0 for forbidden j
  Eigen::VectorXd log_prob_grad(int a) const;

  // d entropy / d logits_j = -p_j (log p_j + entropy); exactly 0 for forbidden j
  Eigen::VectorXd entropy_grad() const;
};

inline constexpr double kForbiddenLogit = -1e9;

// Builds the masked distribution for one state. `fallback` is consulted only
// when `row` allows nothing: the row is replaced by the environment's
// innermost validity mask (or all-allow when null) and `fallback_events` is
// bumped. Sampling never aborts on an empty row.
MaskedDistribution masked_distribution(const Eigen::VectorXd& logits,
                                       ActionMask row,
                                       const ActionMask* fallback = nullptr,
                                       long* fallback_events = nullptr);

}  // namespace maskrl
