#pragma once

// Counter-based random streams. A stream is identified by a 64-bit key; the
// i-th draw is a pure function of (key, i), so substreams for any
// (replication, observation) pair can be built without sequential state.

#include <cmath>
#include <cstdint>

#include "ziber/links.hpp"

namespace ziber {

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key of substream `index` under `parent`.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) {
  return mix64(mix64(parent ^ 0x6A09E667F3BCC909ULL) + 0x9E3779B97F4A7C15ULL * (index + 1));
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}
  constexpr CounterRng(std::uint64_t parent, std::uint64_t index)
      : key_(derive_key(parent, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() {
    return mix64(key_ + 0x9E3779B97F4A7C15ULL * (++counter_));
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * std_normal_quantile(uniform());
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ziber
