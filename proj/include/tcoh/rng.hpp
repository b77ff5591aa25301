#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random number generation (Philox 4x32-10, Salmon et al.,
// SC 2011). Every variate is a pure function of (seed, stream, index): there
// is no generator state, so any slice of any stream can be (re)produced on
// demand, in any order, from any thread. That property is what allows column
// packets to be regenerated instead of stored.
//
// Stream layout used by this project:
//   stream 0            reserved for moving-average window coefficients
//   streams 1..         latent Y columns (sampler), replications (tail MC)

namespace tcoh::rng {

struct U32x4 {
  std::uint32_t v[4];
};

namespace detail {

inline constexpr std::uint32_t kWeylA = 0x9E3779B9u;
inline constexpr std::uint32_t kWeylB = 0xBB67AE85u;
inline constexpr std::uint32_t kMulA = 0xD2511F53u;
inline constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
  const std::uint64_t prod0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
  const std::uint64_t prod1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
  const std::uint32_t c1 = ctr[1];
  const std::uint32_t c3 = ctr[3];
  ctr[0] = hi1 ^ c1 ^ key[0];
  ctr[1] = lo1;
  ctr[2] = hi0 ^ c3 ^ key[1];
  ctr[3] = lo0;
}

}  // namespace detail

// Ten Philox rounds on an explicit 128-bit counter and 64-bit key.
inline U32x4 philox4x32(const std::uint32_t ctr_in[4], std::uint64_t key64) {
  std::uint32_t ctr[4] = {ctr_in[0], ctr_in[1], ctr_in[2], ctr_in[3]};
  std::uint32_t key[2] = {static_cast<std::uint32_t>(key64),
                          static_cast<std::uint32_t>(key64 >> 32)};
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(ctr, key);
    if (round != 9) {
      key[0] += detail::kWeylA;
      key[1] += detail::kWeylB;
    }
  }
  return U32x4{{ctr[0], ctr[1], ctr[2], ctr[3]}};
}

// 128 fresh bits for (seed, stream, counter).
inline U32x4 philox_at(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  const std::uint32_t ctr[4] = {
      static_cast<std::uint32_t>(counter),
      static_cast<std::uint32_t>(counter >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32)};
  return philox4x32(ctr, seed);
}

// Map 64 random bits to the open interval (0,1): 53-bit resolution, offset by
// half an ulp so that 0 and 1 are unreachable (log/quantile safe). Above 2^52
// the half-ulp offset rounds away and the very top bucket would land on 1.0
// exactly, so the result is clamped to the largest double below 1.
inline double to_unit(std::uint64_t x) {
  return std::min((static_cast<double>(x >> 11) + 0.5) * 0x1p-53,
                  0x1.fffffffffffffp-1);
}

inline std::uint64_t lo_hi_to_u64(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

// One uniform (0,1) variate per counter value (words 0,1 of the block).
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index) {
  const U32x4 b = philox_at(seed, stream, index);
  return to_unit(lo_hi_to_u64(b.v[0], b.v[1]));
}

// One uniform [-1,1] variate per counter value.
inline double uniform_pm1(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index) {
  return 2.0 * uniform01(seed, stream, index) - 1.0;
}

// Standard normal pair via Box-Muller on the two uniforms of one counter
// block. Pair `k` always consumes counter `k`, so the value at index i is a
// pure function of (seed, stream, i) regardless of access pattern.
inline void normal_pair(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t pair, double* z0, double* z1) {
  const U32x4 b = philox_at(seed, stream, pair);
  const double u1 = to_unit(lo_hi_to_u64(b.v[0], b.v[1]));
  const double u2 = to_unit(lo_hi_to_u64(b.v[2], b.v[3]));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  *z0 = radius * std::cos(angle);
  *z1 = radius * std::sin(angle);
}

// Standard normal variate at (seed, stream, index).
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) {
  double z0, z1;
  normal_pair(seed, stream, index >> 1, &z0, &z1);
  return (index & 1) ? z1 : z0;
}

// Fill dst[0..count) with normals at indices [index0, index0+count) of the
// stream. Equivalent to calling normal() per index, but each counter block is
// expanded only once.
inline void normal_fill(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index0, std::int64_t count, double* dst) {
  std::uint64_t idx = index0;
  std::int64_t written = 0;
  while (written < count) {
    double z0, z1;
    normal_pair(seed, stream, idx >> 1, &z0, &z1);
    if ((idx & 1) == 0 && written + 1 < count) {
      dst[written++] = z0;
      dst[written++] = z1;
      idx += 2;
    } else {
      dst[written++] = (idx & 1) ? z1 : z0;
      ++idx;
    }
  }
}

// SplitMix64 finalizer; used to derive per-replication seeds from a master
// seed: rep_seed(r) = splitmix64(master ^ (0x9E3779B97F4A7C15 * (r+1))).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace tcoh::rng
