#pragma once

#include <cstdint>
#include <random>

namespace usaug {

/// Deterministic random stream. The draw mappings are pinned here instead of
/// delegated to std distributions (whose output is implementation-defined),
/// so a given seed produces identical byte output on every platform.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  /// Per-sample stream seed, frozen as splitmix64's finalizer applied to
  /// master_seed + (sample_index + 1) * 0x9E3779B97F4A7C15. Sample i's stream
  /// never depends on how many samples follow it.
  static uint64_t derive_seed(uint64_t master_seed, uint64_t sample_index) {
    uint64_t z = master_seed + (sample_index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, range), unbiased via rejection.
  uint64_t bounded(uint64_t range) {
    uint64_t threshold = (~range + 1) % range;  // (2^64 - range) % range
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % range;
    }
  }

  /// Uniform integer on [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<uint64_t>(hi) - lo + 1));
  }

  /// Uniform real on [lo, hi), 53-bit resolution.
  double uniform_double(double lo, double hi) {
    double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  bool bernoulli(double p) { return uniform_double(0.0, 1.0) < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace usaug
