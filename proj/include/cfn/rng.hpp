#pragma once

#include <cstdint>

namespace cfn {

/**
 * Deterministic random generator with explicit substream derivation.
 *
 * xoshiro256++ seeded through splitmix64. We avoid <random> distributions
 * because their output is implementation-defined; every draw here is fully
 * specified, so experiment reports are reproducible across platforms and
 * independent of how replicates are scheduled over worker threads.
 *
 * Substream rule (fixed, relied on by the experiment harness): the state for
 * (master, stream, index) is obtained by running the splitmix64 finalizer
 * over master, then absorbing stream and index with distinct odd constants.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { seed_state(seed); }

  /** Independent generator for one replicate of one experiment phase. */
  static Rng substream(std::uint64_t master, std::uint64_t stream,
                       std::uint64_t index) {
    std::uint64_t h = mix(master);
    h = mix(h ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    h = mix(h ^ (0xbf58476d1ce4e5b9ull * (index + 1)));
    Rng r(0);
    r.seed_state(h);
    return r;
  }

  std::uint64_t next_u64() {
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

  /** Uniform in [0,1) with 53 random bits. */
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /** Fair ±1 spin. */
  int pm1() { return (next_u64() & 1u) ? 1 : -1; }

  /** Unbiased integer in [0, n); rejection sampled. */
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  void seed_state(std::uint64_t seed) {
    // splitmix64 stream fills the xoshiro state; never all-zero.
    std::uint64_t z = seed;
    for (auto& s : s_) {
      z += 0x9e3779b97f4a7c15ull;
      s = mix(z);
    }
  }

  std::uint64_t s_[4];
};

}  // namespace cfn
