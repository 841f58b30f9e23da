#pragma once

#include <cstdint>
#include <initializer_list>

namespace maskadv {

// SplitMix64 finalizer. All randomness in the library flows through this
// mixer so results are bit-identical across platforms and thread counts;
// the standard <random> distributions are implementation-defined and
// would break that contract.
constexpr std::uint64_t mix_bits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a list of words (seed, config index, attribute index, ...) into a
// single stream key.
constexpr std::uint64_t mix(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (std::uint64_t w : words) h = mix_bits(h ^ w);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix_bits(seed)) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

// One uniform [0,1) draw addressed by (seed, i, j); used for per-cell
// rounding streams whose result must not depend on evaluation order.
inline double unit_at(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return static_cast<double>(mix({seed, i, j}) >> 11) * 0x1.0p-53;
}

}  // namespace maskadv
