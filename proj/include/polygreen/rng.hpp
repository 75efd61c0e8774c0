#pragma once

#include <cstdint>

namespace polygreen {

/// Counter-based generator: value i of stream (seed, stream) is a pure hash
/// of (seed, stream, i), so sequences are reproducible across platforms and
/// independent of call interleaving.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream), counter_(0) {}

  uint64_t next_u64() { return hash(seed_, stream_, counter_++); }

  /// Uniform in [0, 1).
  double next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  /// Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  static uint64_t hash(uint64_t seed, uint64_t stream, uint64_t counter) {
    uint64_t z = seed;
    z ^= 0x9E3779B97F4A7C15ull * (stream + 0x632BE59BD9B4E019ull);
    z += 0x9E3779B97F4A7C15ull * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_;
};

}  // namespace polygreen
