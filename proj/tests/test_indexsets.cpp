#include <doctest.h>

#include <cstdint>
#include <stdexcept>

#include "tcoh/indexsets.hpp"

using namespace tcoh;

namespace {

// Independent enumeration oracle for the closed forms.
SetCardinalities brute_force(std::int64_t p, std::int64_t tau, std::int64_t K) {
  SetCardinalities c;
  for (std::int64_t k = 1; k <= p; ++k)
    for (std::int64_t j = k + 1; j <= p; ++j) {
      const std::int64_t d = j - k;
      if (d < tau)
        ++c.i_tau;
      else if (d <= tau + K)
        ++c.i_k;
      else
        ++c.i_zero;
      ++c.total;
    }
  return c;
}

}  // namespace

TEST_SUITE("indexsets") {

TEST_CASE("worked example p=10, tau=3, K=2") {
  const SetCardinalities c = cardinalities(10, 3, 2);
  CHECK(c.i_tau == 17);
  CHECK(c.i_k == 18);
  CHECK(c.i_zero == 10);
  CHECK(c.total == 45);
}

TEST_CASE("closed forms match enumeration for every p <= 60") {
  for (std::int64_t p = 2; p <= 60; ++p)
    for (std::int64_t tau = 1; tau < p; ++tau)
      for (std::int64_t K = 0; tau + K < p; ++K) {
        const SetCardinalities closed = cardinalities(p, tau, K);
        const SetCardinalities brute = brute_force(p, tau, K);
        CAPTURE(p);
        CAPTURE(tau);
        CAPTURE(K);
        REQUIRE(closed.i_tau == brute.i_tau);
        REQUIRE(closed.i_k == brute.i_k);
        REQUIRE(closed.i_zero == brute.i_zero);
        REQUIRE(closed.total == p * (p - 1) / 2);
        REQUIRE(closed.i_tau + closed.i_k + closed.i_zero == closed.total);
      }
}

TEST_CASE("n=4000 schedule cardinalities are frozen") {
  // (p, tau, K) = (44112, 50, 240): the counts the Lemma 1 bounds act on.
  const SetCardinalities c = cardinalities(44112, 50, 240);
  CHECK(c.i_tau == 2160263);
  CHECK(c.i_k == 10590022);
  CHECK(c.i_zero == 960161931);
  CHECK(c.total == 972912216);
  CHECK(c.total == std::int64_t(44112) * 44111 / 2);
}

TEST_CASE("cardinalities rejects bad shapes") {
  CHECK_THROWS_AS(cardinalities(1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(cardinalities(10, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(cardinalities(10, 3, -1), std::invalid_argument);
  CHECK_THROWS_AS(cardinalities(10, 5, 5), std::invalid_argument);  // tau+K >= p
}

TEST_CASE("classify_pair agrees with the partition") {
  const std::int64_t p = 12, tau = 3, K = 2;
  for (std::int64_t k = 1; k <= p; ++k)
    for (std::int64_t j = k + 1; j <= p; ++j) {
      const std::int64_t d = j - k;
      const PairRegion want = d < tau ? PairRegion::band
                              : d <= tau + K ? PairRegion::transition
                                             : PairRegion::outer;
      CHECK(classify_pair(k, j, tau, K) == want);
    }
  CHECK_THROWS_AS(classify_pair(3, 3, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(classify_pair(0, 1, 2, 1), std::invalid_argument);
}

TEST_CASE("gamma_set finds high-correlation columns and counts E_delta") {
  // Columns 2 and 5 are correlated at 0.9; delta = 0.2 flags |corr| > 0.8.
  auto corr = [](std::int64_t k, std::int64_t j) {
    if (k == j) return 1.0;
    const bool hot = (k == 2 && j == 5) || (k == 5 && j == 2);
    return hot ? 0.9 : 0.1;
  };
  const GammaSets gs = gamma_set(corr, 8, 0.2);
  REQUIRE(gs.gamma.size() == 2);
  CHECK(gs.gamma[0] == 2);
  CHECK(gs.gamma[1] == 5);
  // |E_delta| = C(8,2) - C(6,2) = 28 - 15 = 13 pairs touch {2,5}.
  CHECK(gs.e_delta_count == 13);

  const GammaSets none = gamma_set(corr, 8, 0.05);  // threshold 0.95 > 0.9
  CHECK(none.gamma.empty());
  CHECK(none.e_delta_count == 0);
  CHECK_THROWS_AS(gamma_set(corr, 8, 0.0), std::invalid_argument);
}

}  // TEST_SUITE
