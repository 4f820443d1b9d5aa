#include "maskrl/envs/lms.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maskrl::lms {

const std::vector<double>& default_curve() {
  // 15-minute grid over one day. Exactly the three midday periods 50..52
  // reach zeta = 1.24; nothing else exceeds 1.08, so a threshold between
  // 1.08 and 1.24 separates peak from shoulder exactly.
  static const std::vector<double> curve = {
      0.32, 0.30, 0.29, 0.28, 0.27, 0.26, 0.25, 0.24,  //  0: night
      0.24, 0.25, 0.25, 0.26, 0.26, 0.27, 0.27, 0.28,  //  8
      0.29, 0.30, 0.31, 0.32, 0.33, 0.34, 0.35, 0.36,  // 16
      0.38, 0.40, 0.42, 0.44, 0.46, 0.48, 0.50, 0.52,  // 24: morning ramp
      0.54, 0.56, 0.58, 0.60, 0.62, 0.64, 0.66, 0.68,  // 32
      0.70, 0.72, 0.74, 0.75, 0.76, 0.77, 0.78, 0.80,  // 40: late morning
      0.92, 1.06, 1.44, 1.50, 1.41, 1.08, 0.95, 0.86,  // 48: midday peak block
      0.82, 0.80, 0.78, 0.77, 0.76, 0.75, 0.74, 0.74,  // 56: afternoon
      0.73, 0.73, 0.74, 0.75, 0.76, 0.78, 0.80, 0.82,  // 64: evening shoulder
      0.84, 0.85, 0.84, 0.82, 0.80, 0.78, 0.76, 0.73,  // 72
      0.70, 0.66, 0.62, 0.58, 0.54, 0.51, 0.48, 0.45,  // 80: wind-down
      0.42, 0.40, 0.38, 0.36, 0.35, 0.34, 0.33, 0.32,  // 88
  };
  return curve;
}

std::vector<double> load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open load curve file: " + path);
  std::vector<double> curve;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v;
    if (!(ls >> v))
      throw std::runtime_error("malformed load curve line: \"" + line + "\"");
    curve.push_back(v);
  }
  if (curve.empty()) throw std::runtime_error("empty load curve file: " + path);
  return curve;
}

Env::Env(Config cfg) : cfg_(std::move(cfg)) {
  assert(cfg_.horizon() >= 1);
  assert(cfg_.off_budget >= 0);
  assert(cfg_.sigma >= 0.0);
}

double Env::clipped_forecast(double load) {
  // the noise draw happens even at sigma = 0, keeping episode streams aligned
  // across noise levels under a shared seed
  return std::max(0.0, load + cfg_.sigma * rng_.normal());
}

Eigen::VectorXd Env::reset(uint64_t seed) {
  rng_ = Rng(seed);
  s_ = State{};
  s_.prev_load = cfg_.curve[0];  // convention: c_{-1} := c_0
  s_.forecast = clipped_forecast(cfg_.curve[0]);
  s_.remaining_off = cfg_.off_budget;
  return encode();
}

StepOutcome Env::step(int action) {
  assert(action == kActionOn || action == kActionOff);
  const double load = cfg_.curve[s_.t];

  bool off = action == kActionOff && s_.remaining_off > 0;
  if (off)
    --s_.remaining_off;  // the period is exempt from the billed peak
  else
    s_.peak = std::max(s_.peak, load);  // off with spent budget behaves as on

  ++s_.t;
  const bool done = s_.t == cfg_.horizon();

  StepOutcome out;
  out.done = done;
  out.reward = done ? (s_.peak < cfg_.zeta ? 1.0 : -1.0) : 0.0;
  s_.prev_load = load;
  if (!done) s_.forecast = clipped_forecast(cfg_.curve[s_.t]);
  out.observation = encode();
  out.info = {{"off", off ? 1.0 : 0.0},
              {"peak", s_.peak},
              {"remaining_off", static_cast<double>(s_.remaining_off)}};
  return out;
}

Eigen::VectorXd Env::encode() const {
  Eigen::VectorXd obs(3);
  obs << s_.prev_load, s_.forecast,
      static_cast<double>(s_.remaining_off) /
          std::max(1, cfg_.off_budget);
  return obs;
}

Mask<State> Env::validity_mask() const { return allow_all<State>(2); }

Mask<State> forecast_threshold_mask(double theta) {
  assert(theta >= 0.0);
  return {"forecast>=" + std::to_string(theta), [theta](const State& s) {
            ActionMask m = ActionMask::all(2);
            if (s.forecast < theta) m.set(kActionOff, false);
            return m;
          }};
}

}  // namespace maskrl::lms
