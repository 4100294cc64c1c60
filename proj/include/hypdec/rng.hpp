#pragma once

#include <cstdint>
#include <string_view>

#include "hypdec/common.hpp"

namespace hypdec {

// Counter-based generator: every draw is a pure function of
// (seed, stream label, scale, trial, counter), so trials can run on any
// number of workers and still produce identical streams.
class CounterRng {
 public:
  CounterRng(uint64_t seed, std::string_view stream, uint64_t scale,
             uint64_t trial)
      : key_(mix(mix(mix(seed ^ 0x9e3779b97f4a7c15ull, fnv1a(stream)), scale),
                 trial)) {}

  explicit CounterRng(uint64_t key) : key_(key) {}

  uint64_t next_u64() { return mix(key_, counter_++); }

  // uniform in [0, 1)
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_real(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  cd next_phase() {
    double a = 2.0 * kPi * next_unit();
    return {std::cos(a), std::sin(a)};
  }

  double next_sign() { return (next_u64() & 1) ? 1.0 : -1.0; }

  static uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  static uint64_t mix(uint64_t key, uint64_t ctr) {
    // splitmix64 finalizer over a keyed counter
    uint64_t z = key + ctr * 0x9e3779b97f4a7c15ull + 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace hypdec
