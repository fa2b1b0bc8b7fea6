#pragma once

#include <array>
#include <cstdint>

namespace actgraph {

/// splitmix64 step; also used to hash seed material into stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Collision-resistant two-input seed combiner. The first input is fully
/// diffused before the second mixes in, so structured pairs like
/// (seed, index) and (seed+1, index') cannot alias.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t diffused = splitmix64(s);
  s = diffused ^ b;
  return splitmix64(s);
}

/// xoshiro256++ with explicit integer seeding. The integer stream is fully
/// specified by the seed, independent of platform or standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    const std::uint64_t x = next_u64() >> 32;
    return static_cast<int>((x * static_cast<std::uint64_t>(n)) >> 32);
  }

  /// Standard normal via the polar method (sqrt/log only, both IEEE-stable).
  double normal();

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Poisson sample (Knuth); suitable for small means.
  int poisson(double mean);

  /// Independent substream derived from the current state and a stream tag.
  Rng fork(std::uint64_t stream) const {
    return Rng(mix_seed(state_[0] ^ state_[2], stream));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace actgraph
