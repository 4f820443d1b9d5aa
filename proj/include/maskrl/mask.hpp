#pragma once

#include <cassert>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "maskrl/action_mask.hpp"

namespace maskrl {

// A state-dependent action mask: maps a state to its admissible-action set.
// Masks are pure and shareable; combinators build new masks without mutating
// the operands. Composition conventions:
//   conjoin(m1, m2)    an action survives iff both operands allow it
//   prioritize(m1, m2) m1's verdict wherever m1 is active, m2's elsewhere
// "Active" means the mask forbids at least one action in that state, so an
// all-allow row is transparent under prioritize.
template <class S>
struct Mask {
  std::string name;
  std::function<ActionMask(const S&)> eval;

  ActionMask operator()(const S& s) const { return eval(s); }
};

template <class S>
Mask<S> allow_all(int action_count) {
  return {"all_allow",
          [action_count](const S&) { return ActionMask::all(action_count); }};
}

template <class S>
Mask<S> conjoin(Mask<S> m1, Mask<S> m2) {
  std::string name = "(" + m1.name + " & " + m2.name + ")";
  return {std::move(name),
          [f1 = std::move(m1.eval), f2 = std::move(m2.eval)](const S& s) {
            const ActionMask a = f1(s);
            const ActionMask b = f2(s);
            assert(a.size() == b.size());
            return ActionMask(a.size(), a.bits() & b.bits());
          }};
}

template <class S>
Mask<S> prioritize(Mask<S> m1, Mask<S> m2) {
  std::string name = "(" + m1.name + " > " + m2.name + ")";
  return {std::move(name),
          [f1 = std::move(m1.eval), f2 = std::move(m2.eval)](const S& s) {
            const ActionMask a = f1(s);
            return a.restricts() ? a : f2(s);
          }};
}

// Elementary mask families. `value(a)` maps an action index to the scalar the
// heuristic reasons about (e.g. order quantity); `prescribe(s)` is the
// heuristic's recommendation in the same units, not necessarily on the grid.

template <class S>
Mask<S> heuristic_distance(std::string name, int action_count,
                           std::function<double(const S&)> prescribe,
                           std::function<double(int)> value, double radius) {
  assert(radius >= 0.0);
  return {std::move(name),
          [action_count, prescribe = std::move(prescribe),
           value = std::move(value), radius](const S& s) {
            const double h = prescribe(s);
            ActionMask m = ActionMask::none(action_count);
            for (int a = 0; a < action_count; ++a)
              if (std::abs(value(a) - h) <= radius) m.set(a, true);
            return m;
          }};
}

enum class Bound { kAtLeast, kAtMost };

template <class S>
Mask<S> heuristic_threshold(std::string name, int action_count,
                            std::function<double(const S&)> prescribe,
                            std::function<double(int)> value, Bound bound) {
  return {std::move(name),
          [action_count, prescribe = std::move(prescribe),
           value = std::move(value), bound](const S& s) {
            const double h = prescribe(s);
            ActionMask m = ActionMask::none(action_count);
            for (int a = 0; a < action_count; ++a) {
              const double v = value(a);
              const bool ok = bound == Bound::kAtLeast ? v >= h : v <= h;
              if (ok) m.set(a, true);
            }
            return m;
          }};
}

// On states `known` recognizes, allow exactly the actions `optimal` accepts;
// everywhere else allow everything. `known(s)` implies `optimal` accepts at
// least one action in s; callers own that guarantee.
template <class S>
Mask<S> optimal_enforcement(std::string name, int action_count,
                            std::function<bool(const S&)> known,
                            std::function<bool(const S&, int)> optimal) {
  return {std::move(name),
          [action_count, known = std::move(known),
           optimal = std::move(optimal)](const S& s) {
            if (!known(s)) return ActionMask::all(action_count);
            ActionMask m = ActionMask::none(action_count);
            for (int a = 0; a < action_count; ++a)
              if (optimal(s, a)) m.set(a, true);
            return m;
          }};
}

}  // namespace maskrl
