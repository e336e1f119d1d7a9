#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace polarfront {

/// All randomness in the project flows through these helpers so that a
/// (seed, purpose) pair maps to the same stream on every platform and
/// every standard library. Distribution transforms are hand-rolled
/// because std:: distributions are implementation-defined.

/// Stable 64-bit mix of a master seed and a purpose tag (FNV-1a over the
/// tag, then splitmix64 finalization).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), n >= 1. Unbiased rejection sampling.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Deterministic Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace polarfront
