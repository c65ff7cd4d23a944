#pragma once

#include <cmath>
#include <cstdint>

namespace gann {

/// SplitMix64 (Steele, Lea, Vigna). Every source of randomness in this
/// project flows through this generator so that two runs, or two
/// implementations, produce identical streams from the same seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound). Modulo bias is irrelevant for bound << 2^64.
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

  /// Uniform double in [0, 1) with 53 bits of mantissa.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Two uniforms are consumed per draw;
  /// no cached second value, so the stream position stays predictable.
  double next_normal() {
    double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

/// Mixes a seed with a salt into an independent stream seed. Used to give
/// each vertex / iteration / purpose its own generator so results do not
/// depend on the number of worker threads.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed ^ (salt * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL));
  return g.next();
}

}  // namespace gann
