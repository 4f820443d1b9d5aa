#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "maskrl/envs/paintshop.hpp"
#include "maskrl/exp/oracle.hpp"

using namespace maskrl;
using ps::Config;
using ps::State;

namespace {

Config tiny_config() {
  Config cfg;
  cfg.lanes = 2;
  cfg.width = 2;
  cfg.colors = 2;
  cfg.lookahead = 5;
  cfg.sequence_length = 8;
  return cfg;
}

State fresh_state(const Config& cfg, std::vector<int> incoming) {
  State s;
  s.lanes.assign(cfg.lanes, {});
  s.incoming = std::move(incoming);
  return s;
}

// independent reference: plain depth-first minimum over every valid action
// sequence, no masking, no memoization
int brute_force_changes(const State& s, const Config& cfg) {
  if (s.retrieved == cfg.sequence_length) return 0;
  int best = 1 << 20;
  for (int a = 0; a < cfg.action_count(); ++a) {
    State next = s;
    const ps::StepEffect e = ps::apply(next, a, cfg);
    if (e.invalid) continue;
    const int below = brute_force_changes(next, cfg);
    best = std::min(best, (e.color_change ? 1 : 0) + below);
  }
  return best;
}

}  // namespace

TEST_CASE("storing and retrieving move cars as a FIFO lane") {
  const Config cfg = tiny_config();
  State s = fresh_state(cfg, {1, 2, 1, 2, 1, 1, 2, 2});

  // store the first two arrivals into lane 0
  ps::StepEffect e = ps::apply(s, 2, cfg);
  CHECK(!e.invalid);
  CHECK(e.reward == 0.0);
  CHECK(s.lanes[0] == std::vector<int>{1});
  CHECK(s.next == 1);

  e = ps::apply(s, 2, cfg);
  CHECK(s.lanes[0] == std::vector<int>{1, 2});

  // lane 0 is full now; a third store there is invalid and moves nothing
  e = ps::apply(s, 2, cfg);
  CHECK(e.invalid);
  CHECK(e.reward == -10.0);
  CHECK(s.next == 2);
  CHECK(s.lanes[0].size() == 2);

  // retrieval takes the oldest car (color 1), not the newest
  e = ps::apply(s, 0, cfg);
  CHECK(!e.invalid);
  CHECK(e.retrieved_color == 1);
  CHECK(s.lanes[0] == std::vector<int>{2});
  CHECK(s.current_color == 1);
  CHECK(s.retrieved == 1);
  // the very first retrieval never counts as a change and cannot match
  CHECK(!e.color_change);
  CHECK(e.reward == 0.0);

  // retrieving from the empty lane 1 is invalid
  e = ps::apply(s, 1, cfg);
  CHECK(e.invalid);
  CHECK(e.reward == -10.0);
  CHECK(s.retrieved == 1);

  // a retrieval matching the current color pays out and is not a change
  s.lanes[1] = {1};
  e = ps::apply(s, 1, cfg);
  CHECK(e.reward == 1.0);
  CHECK(!e.color_change);

  // a non-matching retrieval is a change and pays nothing
  e = ps::apply(s, 0, cfg);
  CHECK(e.retrieved_color == 2);
  CHECK(e.color_change);
  CHECK(e.reward == 0.0);
}

TEST_CASE("episodes terminate on completion or on the step cap") {
  Config cfg = tiny_config();
  ps::Env env(cfg);
  env.reset_with_sequence({1, 1, 1, 1, 1, 1, 1, 1});

  // alternate store/retrieve through lane 0 until every car left
  int steps = 0;
  bool done = false;
  while (!done) {
    StepOutcome out = env.step(env.state().lanes[0].empty() ? 2 : 0);
    done = out.done;
    ++steps;
    REQUIRE(steps <= 16);
  }
  CHECK(env.state().retrieved == 8);
  CHECK(steps == 16);
  CHECK(env.outgoing().size() == 8);

  // stalling on invalid actions hits the cap at 3x the sequence length
  env.reset_with_sequence({1, 1, 1, 1, 1, 1, 1, 1});
  steps = 0;
  done = false;
  while (!done) {
    StepOutcome out = env.step(0);  // lane 0 stays empty: always invalid
    done = out.done;
    ++steps;
    REQUIRE(steps <= 24);
  }
  CHECK(steps == 24);
  CHECK(env.state().retrieved == 0);
}

TEST_CASE("random play preserves structure over ten thousand steps") {
  Config cfg;
  cfg.lanes = 3;
  cfg.width = 3;
  cfg.colors = 4;
  cfg.sequence_length = 20;
  ps::Env env(cfg);
  Rng rng(99);
  env.reset(rng.bits());

  int steps_in_episode = 0;
  for (int step = 0; step < 10000; ++step) {
    const StepOutcome out = env.step(rng.uniform_int(0, cfg.action_count() - 1));
    ++steps_in_episode;
    const State& s = env.state();

    // conservation: arrived = still stored + retrieved
    int stored = 0;
    for (const auto& lane : s.lanes) {
      CHECK(static_cast<int>(lane.size()) <= cfg.width);
      for (int c : lane) {
        CHECK(c >= 1);
        CHECK(c <= cfg.colors);
      }
      stored += static_cast<int>(lane.size());
    }
    CHECK(s.next == stored + s.retrieved);
    CHECK(s.next <= cfg.sequence_length);
    CHECK(s.steps_taken == steps_in_episode);

    // the observation stays one-hot per slot
    const Eigen::VectorXd obs = env.encode();
    const int span = cfg.colors + 1;
    REQUIRE(obs.size() == cfg.observation_dim());
    for (int slot = 0; slot * span < obs.size(); ++slot)
      CHECK(obs.segment(slot * span, span).sum() == doctest::Approx(1.0));

    if (out.done) {
      CHECK((s.retrieved == cfg.sequence_length ||
             s.steps_taken == cfg.step_cap_factor * cfg.sequence_length));
      env.reset(rng.bits());
      steps_in_episode = 0;
    }
  }
}

TEST_CASE("the observation encodes the state it came from") {
  Config cfg = tiny_config();
  ps::Env env(cfg);
  env.reset_with_sequence({2, 1, 2, 1, 1, 1, 2, 2});
  env.step(2);  // store color 2 into lane 0
  env.step(3);  // store color 1 into lane 1
  env.step(1);  // retrieve color 1 from lane 1

  const State& s = env.state();
  REQUIRE(s.lanes[0] == std::vector<int>{2});
  REQUIRE(s.lanes[1].empty());
  REQUIRE(s.current_color == 1);
  REQUIRE(s.next == 2);

  const Eigen::VectorXd obs = env.encode();
  const int span = cfg.colors + 1;
  auto hot = [&](int slot) {
    for (int c = 0; c < span; ++c)
      if (obs[slot * span + c] == 1.0) return c;
    return -1;
  };
  // grid slots row-major per lane, cars right-justified: lane 0 holds one car
  // in its rightmost column, lane 1 is empty
  CHECK(hot(0) == 0);
  CHECK(hot(1) == 2);
  CHECK(hot(2) == 0);
  CHECK(hot(3) == 0);
  // five lookahead slots starting at the third arrival, 0 past the end
  CHECK(hot(4) == 2);
  CHECK(hot(5) == 1);
  CHECK(hot(6) == 1);
  CHECK(hot(7) == 1);
  CHECK(hot(8) == 2);
  // the last slot carries the current color
  CHECK(hot(9) == 1);

  // distinct tiny states encode distinctly
  std::set<std::vector<double>> seen;
  int states = 0;
  ps::Env e2(cfg);
  Rng rng(5);
  e2.reset(rng.bits());
  for (int i = 0; i < 500; ++i) {
    const StepOutcome out = e2.step(rng.uniform_int(0, cfg.action_count() - 1));
    const Eigen::VectorXd v = e2.encode();
    seen.insert(std::vector<double>(v.data(), v.data() + v.size()));
    ++states;
    if (out.done) e2.reset(rng.bits());
  }
  // far fewer unique encodings than steps would mean colliding states
  CHECK(static_cast<int>(seen.size()) > states / 4);
}

TEST_CASE("arrival sequences are uniform over the palette") {
  Config cfg;
  cfg.colors = 5;
  cfg.sequence_length = 100;
  std::vector<long> counts(cfg.colors + 1, 0);
  const int instances = 1000;
  for (int i = 0; i < instances; ++i)
    for (int c : ps::generate_instance(derive_seed(4242, Stream::kEval, i), cfg))
      ++counts[c];
  CHECK(counts[0] == 0);
  const double total = instances * cfg.sequence_length;
  for (int c = 1; c <= cfg.colors; ++c)
    CHECK(std::abs(counts[c] / total - 0.2) < 0.005);
}

TEST_CASE("validity mask forbids exactly the penalty moves") {
  const Config cfg = tiny_config();
  const Mask<State> inv = ps::mask_invalid(cfg);

  State s = fresh_state(cfg, {1, 2, 1, 2, 1, 1, 2, 2});
  // empty lanes, cars arriving: only stores allowed
  CHECK(inv(s) == ActionMask(4, 0b1100));

  ps::apply(s, 2, cfg);  // lane 0: {1}
  CHECK(inv(s) == ActionMask(4, 0b1101));

  ps::apply(s, 2, cfg);  // lane 0 full
  CHECK(inv(s) == ActionMask(4, 0b1001));

  // drain the arrivals: stores become invalid everywhere
  s.next = 8;
  CHECK(inv(s) == ActionMask(4, 0b0001));
}

TEST_CASE("guidance masks activate exactly on their trigger states") {
  const Config cfg = tiny_config();
  const Mask<State> gr = ps::mask_greedy_retrieval(cfg);
  const Mask<State> ft = ps::mask_free_lane(cfg);
  const Mask<State> gs = ps::mask_greedy_storage(cfg);

  State s = fresh_state(cfg, {2, 1, 2, 1, 1, 1, 2, 2});
  // before the first retrieval nothing matches the null color
  CHECK(gr(s) == ActionMask::all(4));
  CHECK(ft(s) == ActionMask::all(4));

  s.lanes[0] = {1, 2};
  s.lanes[1] = {1};
  s.current_color = 1;
  // both lane exits carry the current color: retrieval match on both
  CHECK(gr(s) == ActionMask(4, 0b0011));

  s.lanes[1] = {2};
  CHECK(gr(s) == ActionMask(4, 0b0001));

  s.current_color = 3;
  // no matching exit: the mask withdraws
  CHECK(gr(s) == ActionMask::all(4));

  // free-lane storage wants the arriving car to match the current color and
  // an empty lane to exist
  State f = fresh_state(cfg, {2, 1, 2, 1, 1, 1, 2, 2});
  f.current_color = 2;  // arriving color 2 matches
  f.lanes[0] = {1};
  CHECK(ft(f) == ActionMask(4, 0b1000));  // only lane 1 is empty
  f.lanes[1] = {1};
  CHECK(ft(f) == ActionMask::all(4));  // no empty lane: withdrawn
  f.lanes = {{}, {}};
  f.current_color = 1;  // arriving color no longer matches
  CHECK(ft(f) == ActionMask::all(4));

  // greedy storage stacks the arrival onto a lane ending in its color
  State g = fresh_state(cfg, {2, 1, 2, 1, 1, 1, 2, 2});
  g.lanes[0] = {1, 2};  // full, newest 2
  g.lanes[1] = {2};     // newest 2, one slot free
  CHECK(gs(g) == ActionMask(4, 0b1000));
  g.lanes[1] = {1};
  CHECK(gs(g) == ActionMask::all(4));
}

TEST_CASE("mask levels stack as conjunction and priority") {
  const Config cfg = tiny_config();
  for (const std::string& level : ps::mask_levels()) {
    const Mask<State> m = ps::combined_mask(level, cfg);
    State s = fresh_state(cfg, {1, 2, 1, 2, 1, 1, 2, 2});
    s.lanes[0] = {1};
    s.current_color = 1;
    const ActionMask row = m(s);
    if (level == "none") {
      CHECK(row == ActionMask::all(4));
    } else {
      // a matching retrieval exists, so every guided level narrows to it
      CHECK(row.allowed(0));
      if (level != "inv") CHECK(row == ActionMask::single(4, 0));
    }
  }
  CHECK(ps::combined_mask("inv", cfg).name == "inv");
  CHECK_THROWS_AS(ps::combined_mask("bogus", cfg), std::invalid_argument);

  // priority: free-lane guidance yields when greedy retrieval is active,
  // applies when it is not
  const Mask<State> m3 = ps::combined_mask("inv+gr+ft", cfg);
  State s = fresh_state(cfg, {2, 1, 2, 1, 1, 1, 2, 2});
  s.lanes[0] = {1};
  s.current_color = 2;  // no retrieval match; arrival matches current color
  CHECK(m3(s) == ActionMask(4, 0b1000));  // store into the empty lane 1
  s.lanes[1] = {2};
  // retrieval match on lane 1 now outranks the free-lane rule
  CHECK(m3(s) == ActionMask::single(4, 1));
}

TEST_CASE("the greedy baseline prefers match - fresh lane - stack") {
  const Config cfg = tiny_config();
  Rng rng(1);

  State s = fresh_state(cfg, {2, 1, 2, 1, 1, 1, 2, 2});
  s.lanes[0] = {2};
  s.lanes[1] = {2};
  s.current_color = 2;
  // matching retrievals on both lanes: lowest lane wins
  CHECK(ps::greedy_action(s, cfg, rng) == 0);

  s.lanes[0] = {1};
  s.lanes[1] = {};
  // no match; arriving 2 == current 2: park in the empty lane 1
  CHECK(ps::greedy_action(s, cfg, rng) == 3);

  s.current_color = 1;
  s.lanes[0] = {2, 2};
  s.lanes[1] = {2};
  // no retrieval match for 1 and no fresh-lane case; the arriving 2 stacks
  // onto lane 1, the only matching lane with space
  CHECK(ps::greedy_action(s, cfg, rng) == 3);

  // nothing applies: any valid action is acceptable
  s.lanes[0] = {2, 2};
  s.lanes[1] = {2, 2};
  s.current_color = 0;
  s.incoming = {1, 1, 1, 1, 1, 1, 1, 1};
  for (int i = 0; i < 20; ++i) {
    const int a = ps::greedy_action(s, cfg, rng);
    CHECK(ps::mask_invalid(cfg)(s).allowed(a));
    CHECK(a < 2);  // full lanes leave only retrievals valid
  }
}

TEST_CASE("completed masked episodes satisfy the reward identity") {
  Config cfg;
  cfg.lanes = 3;
  cfg.width = 3;
  cfg.colors = 3;
  cfg.sequence_length = 30;
  ps::Env env(cfg);
  const Mask<State> inv = ps::mask_invalid(cfg);
  Rng rng(17);

  for (int episode = 0; episode < 20; ++episode) {
    env.reset(derive_seed(811, Stream::kEnvEpisode, episode));
    double total = 0.0;
    bool done = false;
    while (!done) {
      const ActionMask row = inv(env.state());
      REQUIRE(row.any());
      int a = rng.uniform_int(0, cfg.action_count() - 1);
      while (!row.allowed(a)) a = rng.uniform_int(0, cfg.action_count() - 1);
      const StepOutcome out = env.step(a);
      total += out.reward;
      done = out.done;
    }
    if (env.state().retrieved == cfg.sequence_length) {
      const int changes = ps::count_color_changes(env.outgoing());
      // one reward per retrieval that kept the color; the first retrieval
      // never matches, so reward = (n - 1) - changes
      CHECK(total == doctest::Approx(cfg.sequence_length - 1 - changes));
    }
  }
}

TEST_CASE("the exhaustive search agrees with plain brute force") {
  Config cfg = tiny_config();
  cfg.sequence_length = 6;
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const std::vector<int> instance = ps::generate_instance(seed, cfg);
    const State s0 = fresh_state(cfg, instance);
    const int expect = brute_force_changes(s0, cfg);
    const exp::PsOracleResult got = exp::ps_optimal_changes(instance, cfg, "inv");
    CHECK(got.optimal_changes == expect);
    // "none" searches the same reachable space as "inv"
    CHECK(exp::ps_optimal_changes(instance, cfg, "none").optimal_changes ==
          expect);
  }
}

TEST_CASE("guided search never beats the unrestricted optimum") {
  const Config cfg = tiny_config();
  for (uint64_t seed = 10; seed < 18; ++seed) {
    const std::vector<int> instance = ps::generate_instance(seed, cfg);
    const int unrestricted =
        exp::ps_optimal_changes(instance, cfg, "inv").optimal_changes;
    int prev = unrestricted;
    for (const std::string& level : {"inv+gr", "inv+gr+ft", "all"}) {
      const int guided =
          exp::ps_optimal_changes(instance, cfg, level).optimal_changes;
      // tighter levels only shrink the feasible set
      CHECK(guided >= prev);
      prev = guided;
    }
  }
}
