#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace maskrl {

using InfoList = std::vector<std::pair<std::string, double>>;

struct StepOutcome {
  Eigen::VectorXd observation;  // encoding of the successor state
  double reward = 0.0;
  bool done = false;
  InfoList info;
};

inline double info_value(const InfoList& info, const std::string& key,
                         double fallback = 0.0) {
  for (const auto& [k, v] : info)
    if (k == key) return v;
  return fallback;
}

// Environment contract (duck-typed; see the three shipped environments):
//
//   using State = ...;
//   int action_count() const;            fixed for the instance's lifetime
//   int observation_dim() const;         fixed for the instance's lifetime
//   Eigen::VectorXd reset(uint64_t seed) start an episode, return o_0
//   StepOutcome step(int action)         advance one transition
//   const State& state() const;          the raw state masks evaluate on
//   Mask<State> validity_mask() const;   innermost fallback for empty rows
//
// step() accepts any index in [0, action_count): an action being ill-advised
// or even invalid is represented in-band through reward and state, never by
// aborting.

}  // namespace maskrl
