#pragma once

#include <cstdint>
#include <limits>

namespace nlphase {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the n-th draw of a stream is a pure function of (key, n), so
/// streams split off a single experiment seed can be consumed in any order or thread.
class CounterRng {
public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Independent stream `id` derived from an experiment seed.
inline CounterRng split_stream(std::uint64_t seed, std::uint64_t id) {
  return CounterRng(mix64(seed) ^ mix64(id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

}  // namespace nlphase
