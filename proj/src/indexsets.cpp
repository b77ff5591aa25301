#include "tcoh/indexsets.hpp"

#include <cmath>
#include <stdexcept>

namespace tcoh {

SetCardinalities cardinalities(std::int64_t p, std::int64_t tau, std::int64_t K) {
  if (p < 2) throw std::invalid_argument("cardinalities: p >= 2 required");
  if (tau < 1) throw std::invalid_argument("cardinalities: tau >= 1 required");
  if (K < 0) throw std::invalid_argument("cardinalities: K >= 0 required");
  if (tau + K >= p)
    throw std::invalid_argument("cardinalities: tau + K < p required");
  SetCardinalities c;
  c.i_tau = (tau - 1) * (2 * p - tau) / 2;
  c.i_k = (K + 1) * (2 * p - K - 2 * tau) / 2;
  c.i_zero = (p - tau - K - 1) * (p - tau - K) / 2;
  c.total = p * (p - 1) / 2;
  return c;
}

PairRegion classify_pair(std::int64_t k, std::int64_t j, std::int64_t tau,
                         std::int64_t K) {
  if (k < 1) throw std::invalid_argument("classify_pair: k >= 1 required");
  if (k >= j) throw std::invalid_argument("classify_pair: k < j required");
  if (tau < 1) throw std::invalid_argument("classify_pair: tau >= 1 required");
  if (K < 0) throw std::invalid_argument("classify_pair: K >= 0 required");
  const std::int64_t d = j - k;
  if (d < tau) return PairRegion::band;
  if (d <= tau + K) return PairRegion::transition;
  return PairRegion::outer;
}

GammaSets gamma_set(const std::function<double(std::int64_t, std::int64_t)>& corr,
                    std::int64_t p, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("gamma_set: delta in (0,1) required");
  if (p < 1) throw std::invalid_argument("gamma_set: p >= 1 required");
  const double cutoff = 1.0 - delta;
  std::vector<char> in_gamma(static_cast<std::size_t>(p) + 1, 0);
  for (std::int64_t k = 1; k <= p; ++k) {
    for (std::int64_t j = k + 1; j <= p; ++j) {
      if (std::abs(corr(k, j)) > cutoff) {
        in_gamma[k] = 1;
        in_gamma[j] = 1;
      }
    }
  }
  GammaSets out;
  for (std::int64_t k = 1; k <= p; ++k)
    if (in_gamma[k]) out.gamma.push_back(k);
  // Pairs with at least one endpoint in Gamma = all pairs minus pairs fully
  // outside Gamma.
  const std::int64_t g = static_cast<std::int64_t>(out.gamma.size());
  out.e_delta_count = p * (p - 1) / 2 - (p - g) * (p - g - 1) / 2;
  return out;
}

}  // namespace tcoh
