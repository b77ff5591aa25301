#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tcoh/coherence.hpp"
#include "tcoh/errors.hpp"
#include "tcoh/indexsets.hpp"
#include "tcoh/rng.hpp"

using namespace tcoh;

namespace {

Matrix random_matrix(std::int64_t n, std::int64_t p, std::uint64_t seed) {
  Matrix m(n, p);
  for (std::int64_t j = 0; j < p; ++j)
    rng::normal_fill(seed, static_cast<std::uint64_t>(j) + 1, 0, n, m.col(j));
  return m;
}

CoherenceResult blockwise(const Matrix& m, std::int64_t tau, std::int64_t tb,
                          int threads = 1) {
  MatrixSource src(m);
  ScanConfig cfg;
  cfg.tau = tau;
  cfg.block_size = tb;
  cfg.threads = threads;
  return tau_coherence_blockwise(src, cfg);
}

}  // namespace

TEST_SUITE("coherence") {

TEST_CASE("pearson textbook values") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> y{1, 2, 4};
  // Centered: cov 3, norms sqrt(2), sqrt(14/3): rho = 9 / (2 sqrt(21)).
  CHECK(pearson(x, y) == doctest::Approx(9.0 / (2.0 * std::sqrt(21.0)))
                             .epsilon(1e-15));
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{1, 3, 2, 6};
  CHECK(pearson(a, b) == doctest::Approx(std::sqrt(0.7)).epsilon(1e-15));
  // Self-correlation: sqrt(sxx)*sqrt(sxx) differs from sxx by an ulp, so the
  // ratio lands a hair under 1; the clamp only guards the high side.
  CHECK(pearson(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(a, a) <= 1.0);
  // Known-mean mode shifts by the supplied means instead of the sample means.
  const std::vector<double> u{1, -1, 1, -1};
  const std::vector<double> v{2, 0, 2, 0};
  CHECK(pearson(u, v, MeanMode::known, 0.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(u, v, MeanMode::known, 0.0, 0.0) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("pearson reports the degenerate column") {
  const std::vector<double> flat{2, 2, 2};
  const std::vector<double> ok{1, 2, 3};
  try {
    pearson(flat, ok);
    FAIL("expected DegenerateColumnError");
  } catch (const DegenerateColumnError& e) {
    CHECK(e.column() == 1);
  }
  try {
    pearson(ok, flat);
    FAIL("expected DegenerateColumnError");
  } catch (const DegenerateColumnError& e) {
    CHECK(e.column() == 2);
  }
}

TEST_CASE("blockwise equals naive for every block size") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const std::int64_t n = 16 + static_cast<std::int64_t>(seed) * 3;
    const std::int64_t p = 10 + static_cast<std::int64_t>(seed) * 2;
    for (std::int64_t tau : {1, 2, 5}) {
      const Matrix m = random_matrix(n, p, seed);
      const CoherenceResult ref = tau_coherence_naive(m, tau);
      for (std::int64_t tb = 1; tb <= p; ++tb) {
        const CoherenceResult got = blockwise(m, tau, tb);
        CAPTURE(seed);
        CAPTURE(tau);
        CAPTURE(tb);
        REQUIRE(std::fabs(got.l_n_tau - ref.l_n_tau) <= 1e-12);
        REQUIRE(got.argmax_k == ref.argmax_k);
        REQUIRE(got.argmax_j == ref.argmax_j);
        REQUIRE(got.pairs_scanned == ref.pairs_scanned);
      }
    }
  }
}

TEST_CASE("block size and thread count do not change the bits") {
  const Matrix m = random_matrix(40, 28, 11);
  const CoherenceResult base = blockwise(m, 3, 28, 1);
  for (std::int64_t tb : {1, 3, 7, 13, 28}) {
    for (int threads : {1, 2, 4}) {
      const CoherenceResult got = blockwise(m, 3, tb, threads);
      CHECK(got.l_n_tau == base.l_n_tau);  // exact
      CHECK(got.argmax_k == base.argmax_k);
      CHECK(got.argmax_j == base.argmax_j);
    }
  }
}

TEST_CASE("pairs scanned matches the index-set cardinalities") {
  const Matrix m = random_matrix(20, 17, 7);
  for (std::int64_t tau : {1, 2, 5, 16}) {
    const CoherenceResult got = blockwise(m, tau, 5);
    // Pairs with j - k >= tau: |I_K| + |I_0| of any split, i.e. total - I_tau.
    const SetCardinalities c = cardinalities(17, tau, 0);
    CHECK(got.pairs_scanned == c.i_k + c.i_zero);
  }
}

TEST_CASE("power-of-two column scaling changes nothing") {
  const Matrix m = random_matrix(24, 12, 3);
  Matrix scaled = m;
  for (std::int64_t j = 0; j < scaled.p; ++j) {
    const double f = (j % 2 == 0) ? 4.0 : 0.25;
    for (std::int64_t i = 0; i < scaled.n; ++i) scaled.at(i, j) *= f;
  }
  const CoherenceResult a = blockwise(m, 2, 5);
  const CoherenceResult b = blockwise(scaled, 2, 5);
  CHECK(a.l_n_tau == b.l_n_tau);
  CHECK(a.argmax_k == b.argmax_k);
  CHECK(a.argmax_j == b.argmax_j);
}

TEST_CASE("general affine column maps are invariant to rounding noise") {
  const Matrix m = random_matrix(24, 12, 9);
  Matrix mapped = m;
  for (std::int64_t j = 0; j < mapped.p; ++j)
    for (std::int64_t i = 0; i < mapped.n; ++i)
      mapped.at(i, j) = 1.7 * mapped.at(i, j) + 0.3 * double(j);
  const CoherenceResult a = blockwise(m, 2, 12);
  const CoherenceResult b = blockwise(mapped, 2, 12);
  CHECK(std::fabs(a.l_n_tau - b.l_n_tau) <= 1e-12);
}

TEST_CASE("planted duplicate is found with correlation exactly 1") {
  Matrix m = random_matrix(30, 15, 21);
  for (std::int64_t i = 0; i < m.n; ++i) m.at(i, 11) = m.at(i, 2);  // 1-based 3,12
  const CoherenceResult got = blockwise(m, 4, 6);
  CHECK(got.l_n_tau == 1.0);
  CHECK(got.argmax_k == 3);
  CHECK(got.argmax_j == 12);
  const CoherenceResult ref = tau_coherence_naive(m, 4);
  CHECK(ref.l_n_tau == 1.0);
  CHECK(ref.argmax_k == 3);
  CHECK(ref.argmax_j == 12);
}

TEST_CASE("degenerate column in a scan names the 1-based index") {
  Matrix m = random_matrix(12, 6, 13);
  for (std::int64_t i = 0; i < m.n; ++i) m.at(i, 2) = 5.0;  // column 3 constant
  try {
    blockwise(m, 1, 3);
    FAIL("expected DegenerateColumnError");
  } catch (const DegenerateColumnError& e) {
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find("column 3") != std::string::npos);
  }
}

TEST_CASE("known-mean mode matches the naive path") {
  const Matrix m = random_matrix(20, 10, 15);
  std::vector<double> mu(10, 0.0);  // true means are zero
  MatrixSource src(m);
  ScanConfig cfg;
  cfg.tau = 2;
  cfg.block_size = 4;
  cfg.threads = 1;
  cfg.mode = MeanMode::known;
  cfg.mu = mu;
  const CoherenceResult got = tau_coherence_blockwise(src, cfg);
  const CoherenceResult ref = tau_coherence_naive(m, 2, MeanMode::known, mu);
  CHECK(std::fabs(got.l_n_tau - ref.l_n_tau) <= 1e-12);
  CHECK(got.argmax_k == ref.argmax_k);
  CHECK(got.argmax_j == ref.argmax_j);
  // Known means differ from the sample means, so the two modes disagree.
  const CoherenceResult centered = blockwise(m, 2, 4);
  CHECK(got.l_n_tau != centered.l_n_tau);

  cfg.mu.resize(9);
  CHECK_THROWS_AS(tau_coherence_blockwise(src, cfg), std::invalid_argument);
}

TEST_CASE("scan configuration validation") {
  const Matrix m = random_matrix(10, 5, 1);
  MatrixSource src(m);
  ScanConfig cfg;
  cfg.tau = 0;
  CHECK_THROWS_AS(tau_coherence_blockwise(src, cfg), std::invalid_argument);
  cfg.tau = 5;  // tau >= p leaves nothing to scan
  CHECK_THROWS_AS(tau_coherence_blockwise(src, cfg), std::invalid_argument);
}

TEST_CASE("v statistic equals the direct double loop") {
  const Matrix m = random_matrix(18, 9, 27);
  MatrixSource src(m);
  ScanConfig cfg;
  cfg.tau = 2;
  cfg.block_size = 4;
  cfg.threads = 1;
  const CoherenceResult got = v_statistic_result(src, cfg);
  double want = 0.0;
  std::int64_t bk = 0, bj = 0;
  for (std::int64_t k = 0; k < m.p; ++k)
    for (std::int64_t j = k + 2; j < m.p; ++j) {
      double acc = 0.0;
      for (std::int64_t i = 0; i < m.n; ++i) acc += m.at(i, k) * m.at(i, j);
      if (std::fabs(acc) > want) {
        want = std::fabs(acc);
        bk = k + 1;
        bj = j + 1;
      }
    }
  REQUIRE(got.v_n_tau.has_value());
  CHECK(*got.v_n_tau == doctest::Approx(want).epsilon(1e-13));
  CHECK(got.argmax_k == bk);
  CHECK(got.argmax_j == bj);
  CHECK(v_statistic(src, cfg) == *got.v_n_tau);
}

TEST_CASE("default block size obeys the budget") {
  // Largest Tb with 8 (2 n Tb + Tb^2) <= budget.
  CHECK(default_block_size(1000, 20000, std::uint64_t{1} << 30) == 10628);
  const std::int64_t tb = default_block_size(500, 10000, 1 << 20);
  CHECK(8 * (2 * 500 * tb + tb * tb) <= (1 << 20));
  CHECK(8 * (2 * 500 * (tb + 1) + (tb + 1) * (tb + 1)) > (1 << 20));
  CHECK(default_block_size(100, 50, 1) == 1);            // floor clamp
  CHECK(default_block_size(100, 50, std::uint64_t{1} << 40) == 50);  // cap at p
}

TEST_CASE("exact norms make the norm-comparison bound exact") {
  // 16 balanced +/-1 columns: means are exactly 0, norms exactly 4, so
  // c1 = c3 = 0 and n rho equals the raw inner product bit for bit.
  const std::int64_t n = 16, p = 8;
  Matrix m(n, p);
  for (std::int64_t j = 0; j < p; ++j)
    for (std::int64_t i = 0; i < n; ++i) {
      // Distinct balanced sign patterns: single bits of i, then XORs of two
      // adjacent bits (each balanced over i = 0..15).
      const std::int64_t b = j % 4;
      const std::int64_t bit = j < 4
                                   ? (i >> b) & 1
                                   : ((i >> b) ^ (i >> ((b + 1) % 4))) & 1;
      m.at(i, j) = bit ? 1.0 : -1.0;
    }
  for (std::int64_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += m.at(i, j);
    REQUIRE(s == 0.0);  // balanced by construction
  }
  const JiangReport rep = jiang_diagnostics(m, 2, 1);
  CHECK(rep.c1 == 0.0);
  CHECK(rep.c2 == 1.0);
  CHECK(rep.c3 == 0.0);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs == 0.0);
  CHECK(rep.delta_n == std::fabs(16.0 * rep.l_n_tau - rep.v_n_tau));
}

TEST_CASE("column summary: hand values and shift inequality") {
  // mean 2.5, sum sq 30, centered sum sq 30 - 4*2.5^2 = 5
  const double x[] = {1.0, 2.0, 3.0, 4.0};
  const ColumnSummary s = column_summary(x, 4);
  CHECK(s.mean == 2.5);
  CHECK(s.raw_norm == std::sqrt(30.0));
  CHECK(s.centered_norm == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));

  const double c[] = {7.0, 7.0, 7.0};
  const ColumnSummary sc = column_summary(c, 3);
  CHECK(sc.mean == 7.0);
  CHECK(sc.centered_norm == 0.0);

  // Centering a column never increases its norm.
  const Matrix m = random_matrix(37, 8, 404);
  for (std::int64_t j = 0; j < 8; ++j) {
    const ColumnSummary r = column_summary(m.col(j), 37);
    CHECK(r.centered_norm <= r.raw_norm);
  }
}

TEST_CASE("norm-comparison bound holds on random instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::int64_t n = 20 + static_cast<std::int64_t>(seed % 5) * 7;
    const std::int64_t p = 12 + static_cast<std::int64_t>(seed % 3) * 4;
    const Matrix m = random_matrix(n, p, seed * 101);
    const JiangReport rep = jiang_diagnostics(m, 3, 1);
    CAPTURE(seed);
    REQUIRE(rep.lhs <= rep.rhs);
    CHECK(rep.prop1 ==
          doctest::Approx((double(n) * double(n) * rep.l_n_tau * rep.l_n_tau -
                           rep.v_n_tau * rep.v_n_tau) /
                          double(n))
              .epsilon(1e-12));
    CHECK(rep.pairs_scanned == cardinalities(p, 3, 0).i_k +
                                   cardinalities(p, 3, 0).i_zero);
  }
}

}  // TEST_SUITE
