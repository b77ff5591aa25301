#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace tcoh {

// The ordered pairs I = {(k,j) : 1 <= k < j <= p} partition by distance
// d = j - k into the central band I_tau (d < tau), the transition band I_K
// (tau <= d <= tau+K), and the outer region I_0 (d > tau+K). Column indices
// in this header are 1-based, matching the statistical convention used in
// reports.

struct SetCardinalities {
  std::int64_t i_tau = 0;
  std::int64_t i_k = 0;
  std::int64_t i_zero = 0;
  std::int64_t total = 0;  // p(p-1)/2
};

enum class PairRegion { band, transition, outer };

// Closed-form counts: |I_tau| = (tau-1)(2p-tau)/2,
// |I_K| = (K+1)(2p-K-2tau)/2, |I_0| = (p-tau-K-1)(p-tau-K)/2.
// Rejects p < 2, tau < 1, K < 0, tau + K >= p.
SetCardinalities cardinalities(std::int64_t p, std::int64_t tau, std::int64_t K);

// Region of the pair (k,j), 1 <= k < j. Rejects k >= j or k < 1.
PairRegion classify_pair(std::int64_t k, std::int64_t j, std::int64_t tau,
                         std::int64_t K);

struct GammaSets {
  std::vector<std::int64_t> gamma;  // sorted 1-based indices of Gamma_{p,delta}
  // |E_delta| = #{(k,j) in I : k in Gamma or j in Gamma}
  //           = C(p,2) - C(p-|Gamma|,2), computed exactly.
  std::int64_t e_delta_count = 0;
};

// Gamma_{p,delta} = { k : |corr(k,j)| > 1-delta for some j != k }, found by
// scanning all off-diagonal pairs (O(p^2) accessor calls). `corr` must be
// symmetric with unit diagonal; only the upper triangle is consulted.
// Rejects delta outside (0,1).
GammaSets gamma_set(const std::function<double(std::int64_t, std::int64_t)>& corr,
                    std::int64_t p, double delta);

}  // namespace tcoh
