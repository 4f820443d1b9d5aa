#pragma once

#include <bit>
#include <cassert>
#include <cstdint>

namespace maskrl {

// Admissible-action set for one state, stored as a bitvector. All shipped
// environments have <= 16 actions; 64 is a hard cap asserted at construction.
class ActionMask {
 public:
  static constexpr int kMaxActions = 64;

  ActionMask() = default;

  ActionMask(int n, uint64_t bits) : n_(n), bits_(bits & width_mask(n)) {
    assert(n >= 0 && n <= kMaxActions);
  }

  static ActionMask all(int n) { return ActionMask(n, ~uint64_t(0)); }
  static ActionMask none(int n) { return ActionMask(n, 0); }
  static ActionMask single(int n, int a) { return ActionMask(n, uint64_t(1) << a); }

  int size() const { return n_; }
  uint64_t bits() const { return bits_; }

  bool allowed(int a) const {
    assert(a >= 0 && a < n_);
    return (bits_ >> a) & 1;
  }

  void set(int a, bool v) {
    assert(a >= 0 && a < n_);
    if (v)
      bits_ |= uint64_t(1) << a;
    else
      bits_ &= ~(uint64_t(1) << a);
  }

  int count() const { return std::popcount(bits_); }
  bool any() const { return bits_ != 0; }

  // A mask is "active" in a state when it forbids at least one action there.
  bool restricts() const { return bits_ != width_mask(n_); }

  friend bool operator==(const ActionMask&, const ActionMask&) = default;

 private:
  static uint64_t width_mask(int n) {
    return n >= kMaxActions ? ~uint64_t(0) : (uint64_t(1) << n) - 1;
  }

  int n_ = 0;
  uint64_t bits_ = 0;
};

}  // namespace maskrl
