#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>

namespace maskrl {

// Deterministic seed derivation. A run owns one root seed; every consumer
// (episode k of an environment, the action sampler, the weight initializer)
// gets its own stream derived from (root, stream tag, counter), so any episode
// is reproducible in isolation and random streams stay aligned across
// configurations that share a root seed.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : uint64_t {
  kEnvEpisode = 1,   // per-episode environment randomness
  kActionSample = 2, // policy action sampling during rollouts
  kInit = 3,         // network weight initialization
  kShuffle = 4,      // minibatch shuffling
  kEval = 5,         // evaluation episodes
  kBaseline = 6,     // baseline policy tie-breaking
};

inline uint64_t derive_seed(uint64_t root, Stream stream, uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(root) ^ static_cast<uint64_t>(stream)) ^ counter);
}

// mt19937_64 wrapper with fixed, portable sampling algorithms. The std
// distributions are implementation-defined, so inverse-transform / Box-Muller
// are spelled out here; every sampler consumes a predictable number of draws.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t bits() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // inclusive bounds, unbiased via rejection
  int uniform_int(int lo, int hi) {
    assert(lo <= hi);
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    uint64_t x, r;
    do {
      x = gen_();
      r = x % range;
    } while (x - r > uint64_t(0) - range);
    return lo + static_cast<int>(r);
  }

  // standard normal, Box-Muller without spare caching (2 draws per call)
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // inverse-transform sampling; exact CDF walk, fine for the small rates used here
  int poisson(double lambda) {
    assert(lambda >= 0.0);
    if (lambda == 0.0) return 0;
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 10000) {
      ++k;
      p *= lambda / k;
      cdf += p;
    }
    return k;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace maskrl
