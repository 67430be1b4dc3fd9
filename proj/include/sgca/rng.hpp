#pragma once

#include <cmath>
#include <cstdint>

namespace sgca {

// Hash-combine plus a splitmix64 finalizer round. Used to derive independent
// counter-based streams from (seed, purpose, epoch, batch, ...).
inline std::uint64_t mix64(std::uint64_t h, std::uint64_t x) {
  h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

// splitmix64. Distributions are written out here so results never depend on
// the standard library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                   std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t h = mix64(seed, a);
    h = mix64(h, b);
    h = mix64(h, c);
    h = mix64(h, d);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1) with 53 random mantissa bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

  // [0, n) via 128-bit multiply
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Stream tags keep unrelated draws on disjoint streams of the same seed.
namespace stream {
inline constexpr std::uint64_t init = 0x01;
inline constexpr std::uint64_t shuffle = 0x02;
inline constexpr std::uint64_t dropout = 0x03;
inline constexpr std::uint64_t synth = 0x04;
inline constexpr std::uint64_t queries = 0x05;
inline constexpr std::uint64_t gradcheck = 0x06;
}  // namespace stream

}  // namespace sgca
