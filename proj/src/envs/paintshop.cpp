#include "maskrl/envs/paintshop.hpp"

#include <cassert>
#include <stdexcept>

namespace maskrl::ps {

namespace {
constexpr double kInvalidPenalty = -10.0;
}

std::vector<int> generate_instance(uint64_t seed, const Config& cfg) {
  Rng rng(seed);
  std::vector<int> seq(cfg.sequence_length);
  for (int& c : seq) c = rng.uniform_int(1, cfg.colors);
  return seq;
}

int count_color_changes(const std::vector<int>& outgoing) {
  int changes = 0;
  for (size_t i = 1; i < outgoing.size(); ++i)
    if (outgoing[i] != outgoing[i - 1]) ++changes;
  return changes;
}

Env::Env(Config cfg) : cfg_(cfg) {
  assert(cfg_.lanes >= 1 && cfg_.width >= 1 && cfg_.colors >= 1);
  assert(cfg_.lookahead >= 1 && cfg_.sequence_length >= 1);
  assert(cfg_.action_count() <= ActionMask::kMaxActions);
}

Eigen::VectorXd Env::reset(uint64_t seed) {
  return start_episode(generate_instance(seed, cfg_));
}

Eigen::VectorXd Env::reset_with_sequence(std::vector<int> sequence) {
  assert(static_cast<int>(sequence.size()) == cfg_.sequence_length);
  return start_episode(std::move(sequence));
}

Eigen::VectorXd Env::start_episode(std::vector<int> sequence) {
  s_ = State{};
  s_.lanes.assign(cfg_.lanes, {});
  s_.incoming = std::move(sequence);
  outgoing_.clear();
  return encode();
}

StepEffect apply(State& s, int action, const Config& cfg) {
  StepEffect e;
  if (action < cfg.lanes) {
    auto& lane = s.lanes[action];
    if (lane.empty()) {
      e.invalid = true;
      e.reward = kInvalidPenalty;
    } else {
      const int car = lane.front();
      lane.erase(lane.begin());
      e.reward = car == s.current_color ? 1.0 : 0.0;
      e.color_change = s.current_color != 0 && car != s.current_color;
      e.retrieved_color = car;
      s.current_color = car;
      ++s.retrieved;
    }
  } else {
    auto& lane = s.lanes[action - cfg.lanes];
    const bool lane_full = static_cast<int>(lane.size()) >= cfg.width;
    const bool nothing_arriving = s.next >= static_cast<int>(s.incoming.size());
    if (lane_full || nothing_arriving) {
      e.invalid = true;
      e.reward = kInvalidPenalty;
    } else {
      lane.push_back(s.incoming[s.next]);
      ++s.next;
    }
  }
  ++s.steps_taken;
  return e;
}

StepOutcome Env::step(int action) {
  assert(action >= 0 && action < cfg_.action_count());
  const StepEffect e = apply(s_, action, cfg_);
  if (e.retrieved_color != 0) outgoing_.push_back(e.retrieved_color);

  const bool all_out = s_.retrieved == cfg_.sequence_length;
  const bool capped =
      s_.steps_taken >= cfg_.step_cap_factor * cfg_.sequence_length;

  StepOutcome out;
  out.reward = e.reward;
  out.done = all_out || capped;
  out.observation = encode();
  out.info = {{"color_change", e.color_change ? 1.0 : 0.0},
              {"invalid", e.invalid ? 1.0 : 0.0},
              {"completed", all_out ? 1.0 : 0.0}};
  return out;
}

Eigen::VectorXd Env::encode() const {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(cfg_.observation_dim());
  const int span = cfg_.colors + 1;
  int slot = 0;
  // grid cells, each lane scanned left to right; cars sit right-justified
  for (int i = 0; i < cfg_.lanes; ++i) {
    const auto& lane = s_.lanes[i];
    const int n = static_cast<int>(lane.size());
    for (int col = 0; col < cfg_.width; ++col) {
      const int free = cfg_.width - n;
      // column col holds the (W - col)-th oldest car; lane is oldest-first
      const int color = col < free ? 0 : lane[cfg_.width - 1 - col];
      obs[slot * span + color] = 1.0;
      ++slot;
    }
  }
  for (int k = 0; k < cfg_.lookahead; ++k) {
    obs[slot * span + s_.upcoming(k)] = 1.0;
    ++slot;
  }
  obs[slot * span + s_.current_color] = 1.0;
  return obs;
}

Mask<State> Env::validity_mask() const { return mask_invalid(cfg_); }

Mask<State> mask_invalid(const Config& cfg) {
  return {"inv", [cfg](const State& s) {
            ActionMask m = ActionMask::none(cfg.action_count());
            const bool arriving = s.next < static_cast<int>(s.incoming.size());
            for (int i = 0; i < cfg.lanes; ++i) {
              m.set(i, !s.lanes[i].empty());
              m.set(cfg.lanes + i,
                    arriving && static_cast<int>(s.lanes[i].size()) < cfg.width);
            }
            return m;
          }};
}

Mask<State> mask_greedy_retrieval(const Config& cfg) {
  auto match = [](const State& s, int lane) {
    return s.current_color != 0 && s.retrievable(lane) == s.current_color;
  };
  return optimal_enforcement<State>(
      "gr", cfg.action_count(),
      [cfg, match](const State& s) {
        for (int i = 0; i < cfg.lanes; ++i)
          if (match(s, i)) return true;
        return false;
      },
      [cfg, match](const State& s, int a) {
        return a < cfg.lanes && match(s, a);
      });
}

Mask<State> mask_free_lane(const Config& cfg) {
  auto applies = [cfg](const State& s) {
    if (s.current_color == 0 || s.upcoming(0) != s.current_color) return false;
    for (int i = 0; i < cfg.lanes; ++i)
      if (s.lanes[i].empty()) return true;
    return false;
  };
  return optimal_enforcement<State>(
      "ft", cfg.action_count(), applies, [cfg](const State& s, int a) {
        return a >= cfg.lanes && s.lanes[a - cfg.lanes].empty();
      });
}

Mask<State> mask_greedy_storage(const Config& cfg) {
  auto match = [cfg](const State& s, int lane) {
    const int e1 = s.upcoming(0);
    return e1 != 0 && s.newest(lane) == e1 &&
           static_cast<int>(s.lanes[lane].size()) < cfg.width;
  };
  return {"gs", [cfg, match](const State& s) {
            ActionMask m = ActionMask::none(cfg.action_count());
            bool found = false;
            for (int i = 0; i < cfg.lanes; ++i)
              if (match(s, i)) {
                m.set(cfg.lanes + i, true);
                found = true;
              }
            return found ? m : ActionMask::all(cfg.action_count());
          }};
}

Mask<State> combined_mask(const std::string& level, const Config& cfg) {
  if (level == "none") return allow_all<State>(cfg.action_count());
  if (level == "inv") return mask_invalid(cfg);
  if (level == "inv+gr")
    return conjoin(mask_invalid(cfg), mask_greedy_retrieval(cfg));
  if (level == "inv+gr+ft")
    return conjoin(mask_invalid(cfg),
                   prioritize(mask_greedy_retrieval(cfg), mask_free_lane(cfg)));
  if (level == "all")
    return conjoin(mask_invalid(cfg),
                   prioritize(prioritize(mask_greedy_retrieval(cfg),
                                         mask_free_lane(cfg)),
                              mask_greedy_storage(cfg)));
  throw std::invalid_argument("unknown paint-shop mask level \"" + level +
                              "\" (expected none|inv|inv+gr|inv+gr+ft|all)");
}

const std::vector<std::string>& mask_levels() {
  static const std::vector<std::string> levels = {"none", "inv", "inv+gr",
                                                  "inv+gr+ft", "all"};
  return levels;
}

int greedy_action(const State& s, const Config& cfg, Rng& rng) {
  // 1. retrieve a lane whose exit car matches the current color
  if (s.current_color != 0)
    for (int i = 0; i < cfg.lanes; ++i)
      if (s.retrievable(i) == s.current_color) return i;

  const int e1 = s.upcoming(0);
  if (e1 != 0) {
    // 2. the arriving car matches the current color: park it in a fresh lane
    if (e1 == s.current_color)
      for (int i = 0; i < cfg.lanes; ++i)
        if (s.lanes[i].empty()) return cfg.lanes + i;
    // 3. stack the arriving car onto a lane ending in its color
    for (int i = 0; i < cfg.lanes; ++i)
      if (s.newest(i) == e1 && static_cast<int>(s.lanes[i].size()) < cfg.width)
        return cfg.lanes + i;
  }

  // 4. uniform random valid action
  std::vector<int> valid;
  const ActionMask m = mask_invalid(cfg)(s);
  for (int a = 0; a < cfg.action_count(); ++a)
    if (m.allowed(a)) valid.push_back(a);
  assert(!valid.empty());
  return valid[rng.uniform_int(0, static_cast<int>(valid.size()) - 1)];
}

}  // namespace maskrl::ps
