#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "maskrl/env.hpp"
#include "maskrl/mask.hpp"
#include "maskrl/rng.hpp"

namespace maskrl::ps {

// Color-batching buffer between paint shop and assembly. Cars arrive in a
// fixed sequence, pass through one of `lanes` FIFO lanes, and leave toward
// assembly; every color change in the outgoing sequence costs a purge, so the
// controller reorders through lane choice to batch colors.
//
// Actions 0..L-1 retrieve from lane a; actions L..2L-1 store the next arriving
// car into lane a-L. Colors are 1..C; 0 encodes "empty" / "no color" and
// matches no real color.
struct Config {
  int lanes = 4;      // L
  int width = 4;      // W, cars per lane
  int colors = 10;    // C
  int lookahead = 5;  // K next colors visible in the observation
  int sequence_length = 100;
  // episodes abort after step_cap_factor * sequence_length steps; unmasked
  // random play would otherwise never finish (invalid actions consume a step
  // but no car)
  int step_cap_factor = 3;

  int action_count() const { return 2 * lanes; }
  int observation_dim() const {
    return (lanes * width + lookahead + 1) * (colors + 1);
  }
};

// Lane vectors are oldest-first: lane[0] is the only retrievable car and sits
// in the rightmost grid column; an arriving car appends and occupies the
// deepest free column, so a lane's occupied cells always form a contiguous
// right-justified block.
struct State {
  std::vector<std::vector<int>> lanes;
  std::vector<int> incoming;  // full arrival sequence
  int next = 0;               // index of the next arriving car
  int current_color = 0;      // p_t: color of the last retrieved car, 0 initially
  int retrieved = 0;
  int steps_taken = 0;

  int upcoming(int k) const {  // k-th next arrival color, 0 past the end
    const size_t i = static_cast<size_t>(next) + k;
    return i < incoming.size() ? incoming[i] : 0;
  }
  int retrievable(int lane) const {  // color at the lane exit, 0 if empty
    return lanes[lane].empty() ? 0 : lanes[lane].front();
  }
  int newest(int lane) const {  // color at the lane entry side, 0 if empty
    return lanes[lane].empty() ? 0 : lanes[lane].back();
  }
};

std::vector<int> generate_instance(uint64_t seed, const Config& cfg);

// Color changes in a retrieval sequence: transitions between consecutive
// retrieved cars only, so the first car never counts.
int count_color_changes(const std::vector<int>& outgoing);

// Single source of the transition dynamics, shared by the environment and the
// exhaustive-search oracle. Advances s in place.
struct StepEffect {
  double reward = 0.0;
  bool invalid = false;
  bool color_change = false;
  int retrieved_color = 0;  // 0 when the action was not a retrieval
};
StepEffect apply(State& s, int action, const Config& cfg);

class Env {
 public:
  using State = ps::State;

  explicit Env(Config cfg);

  int action_count() const { return cfg_.action_count(); }
  int observation_dim() const { return cfg_.observation_dim(); }
  const Config& config() const { return cfg_; }
  const State& state() const { return s_; }

  Eigen::VectorXd reset(uint64_t seed);
  // reuse of a fixed arrival sequence, for paired evaluation across policies
  Eigen::VectorXd reset_with_sequence(std::vector<int> sequence);

  StepOutcome step(int action);

  Eigen::VectorXd encode() const;
  Mask<State> validity_mask() const;

  // colors of the cars retrieved so far, in retrieval order
  const std::vector<int>& outgoing() const { return outgoing_; }

 private:
  Eigen::VectorXd start_episode(std::vector<int> sequence);

  Config cfg_;
  State s_;
  std::vector<int> outgoing_;
};

// Elementary masks. Each returns all-allow on states outside its competence,
// so they compose with prioritize as written.
Mask<State> mask_invalid(const Config& cfg);    // forbid no-op penalty moves
Mask<State> mask_greedy_retrieval(const Config& cfg);  // retrieve a color match
Mask<State> mask_free_lane(const Config& cfg);  // open a fresh lane for p_t
Mask<State> mask_greedy_storage(const Config& cfg);  // stack onto a color match

// Named stacks: "none", "inv", "inv+gr", "inv+gr+ft", "all".
// throws std::invalid_argument on an unknown level
Mask<State> combined_mask(const std::string& level, const Config& cfg);
const std::vector<std::string>& mask_levels();

// One-step lookahead rule used as the non-learning baseline: greedy retrieval,
// else free-lane storage, else greedy storage, else a uniform random valid
// action; ties take the lowest lane index.
int greedy_action(const State& s, const Config& cfg, Rng& rng);

}  // namespace maskrl::ps
