#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "cqg/error.hpp"

namespace cqg::num {

// Philox4x32-10 counter-based generator. A (seed, 128-bit counter) pair maps
// to four 32-bit words with no sequential state, so any partition of the
// sample index space reads the same stream — the property the deterministic
// Monte-Carlo driver is built on.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kBump0 = 0x9E3779B9u;  // golden ratio
inline constexpr std::uint32_t kBump1 = 0xBB67AE85u;  // sqrt(3) - 1
inline constexpr int kRounds = 10;

inline void round_once(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                       std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint64_t(p1) >> 32, lo1 = std::uint32_t(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace philox

// One Philox block: counter given as two 64-bit halves (lo = words 0,1;
// hi = words 2,3), key from the 64-bit seed.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed,
                                               std::uint64_t ctr_lo,
                                               std::uint64_t ctr_hi) {
  std::array<std::uint32_t, 4> c = {
      std::uint32_t(ctr_lo), std::uint32_t(ctr_lo >> 32),
      std::uint32_t(ctr_hi), std::uint32_t(ctr_hi >> 32)};
  std::uint32_t k0 = std::uint32_t(seed), k1 = std::uint32_t(seed >> 32);
  for (int r = 0; r < philox::kRounds; ++r) {
    philox::round_once(c, k0, k1);
    if (r + 1 < philox::kRounds) {
      k0 += philox::kBump0;
      k1 += philox::kBump1;
    }
  }
  return c;
}

// Uniform double in [0, 1) from two Philox words: top 53 bits of the
// concatenation, identical arithmetic in the scalar and SIMD kernels.
inline double uniform_from_words(std::uint32_t w_hi, std::uint32_t w_lo) {
  const std::uint64_t u = (std::uint64_t(w_hi) << 32) | w_lo;
  return double(u >> 11) * 0x1.0p-53;
}

// Two uniforms per block, fixed word pairing (0,1) and (2,3).
inline std::array<double, 2> philox_uniform2(std::uint64_t seed,
                                             std::uint64_t ctr_lo,
                                             std::uint64_t ctr_hi) {
  const auto w = philox4x32(seed, ctr_lo, ctr_hi);
  return {uniform_from_words(w[0], w[1]), uniform_from_words(w[2], w[3])};
}

// Counter-based stream: consuming n doubles advances the low counter half by
// ceil(n/2) blocks. Streams with counters offset by at least that stride are
// disjoint by construction.
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t counter_lo = 0;
  std::uint64_t counter_hi = 0;
};

inline void random_uniform(RandomStream& s, std::span<double> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    const auto u = philox_uniform2(s.seed, s.counter_lo, s.counter_hi);
    ++s.counter_lo;
    if (s.counter_lo == 0) ++s.counter_hi;  // 128-bit carry
    out[i++] = u[0];
    if (i < out.size()) out[i++] = u[1];
  }
}

inline double random_uniform(RandomStream& s) {
  double x;
  random_uniform(s, std::span<double>(&x, 1));
  return x;
}

}  // namespace cqg::num
