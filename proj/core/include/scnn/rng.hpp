#pragma once

#include <cmath>
#include <cstdint>

namespace scnn {

/// Seed plus stream id. Identical (seed, stream) pairs produce identical
/// sample sequences on every platform; distinct stream ids give independent
/// sequences, so masks for different layers can be built in parallel.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Stream derivation scheme used across the library: each consumer owns a
// domain constant and offsets the stream id by a local index. Domains are
// spaced 2^56 apart, so indices below 2^56 never collide.
namespace rng_domain {
inline constexpr std::uint64_t kMaskLayer = 0x01ull << 56;
inline constexpr std::uint64_t kInitLayer = 0x02ull << 56;
inline constexpr std::uint64_t kShuffle = 0x03ull << 56;
inline constexpr std::uint64_t kDropout = 0x04ull << 56;
inline constexpr std::uint64_t kForestTree = 0x05ull << 56;
inline constexpr std::uint64_t kBlob = 0x06ull << 56;
}  // namespace rng_domain

inline RngSeed derive_stream(RngSeed base, std::uint64_t domain,
                             std::uint64_t index) {
  return RngSeed{base.seed, base.stream + domain + index};
}

/// SplitMix64 (Steele, Lea, Flood 2014). State walks a Weyl sequence with the
/// golden-ratio increment; outputs are the mixed state. Pure 64-bit integer
/// arithmetic, so integer draws are bit-reproducible across platforms and
/// compilers. The (seed, stream) pair is hashed into a start position, which
/// makes subsequences from distinct pairs non-overlapping in practice.
class SplitMix64 {
 public:
  explicit SplitMix64(RngSeed s)
      : state_(mix(s.seed) + mix(s.stream ^ 0x9E3779B97F4A7C15ull)) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Bit-reproducibility of this path depends
  /// on the platform's libm; the integer draws above are the portability
  /// contract, gaussians are only used for synthetic test data.
  double normal() {
    double u1 = uniform();
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace scnn
