#pragma once

#include <cstdint>

namespace pathguess {

// Fixed, portable generator stack used by every stochastic routine:
//
//   * scramble64   - the splitmix64 finalizer (Steele, Lea, Flood 2014)
//   * Xoshiro256pp - xoshiro256++ (Blackman & Vigna 2019), state seeded from
//                    the splitmix64 sequence as its authors recommend
//   * derive_stream_seed(seed, i) = scramble64(seed ^ scramble64(i + phi64))
//
// Replicate i of an experiment always runs on the stream derived from the
// experiment seed, so results are independent of scheduling and thread count.

inline std::uint64_t scramble64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    state += kGolden64;
    return scramble64(state);
  }
};

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
  return scramble64(seed ^ scramble64(index + kGolden64));
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 significant bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace pathguess
