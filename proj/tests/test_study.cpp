#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "tcoh/limitlaw.hpp"
#include "tcoh/rng.hpp"
#include "tcoh/study.hpp"
#include "test_util.hpp"

using namespace tcoh;

namespace {

ModelParams toy_params() {
  ModelParams p;
  p.n = 50;
  p.p = 40;
  p.tau = 2;
  p.K = 3;
  p.eps_n = 0.1;
  return p;
}

StudyConfig toy_config(std::int64_t reps, std::uint64_t master) {
  StudyConfig cfg;
  cfg.params = toy_params();
  cfg.replications = reps;
  cfg.master_seed = master;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_SUITE("study") {

TEST_CASE("replication seeds follow the documented derivation") {
  for (std::int64_t r : {0, 1, 5, 199}) {
    const std::uint64_t mix =
        0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(r) + 1);
    CHECK(replication_seed(77, r) == rng::splitmix64(77ull ^ mix));
  }
  CHECK(replication_seed(77, 0) != replication_seed(77, 1));
  CHECK(replication_seed(77, 0) != replication_seed(78, 0));
}

TEST_CASE("scan distance defaults to the window-induced band") {
  const ModelParams p = toy_params();
  CHECK(effective_scan_tau(p) == 2 * p.tau + 1);
  CHECK(effective_scan_tau(p, 0) == 5);
  CHECK(effective_scan_tau(p, p.tau) == p.tau);
  CHECK(effective_scan_tau(p, 9) == 9);
}

TEST_CASE("run_replication is a pure function of its seed") {
  const ModelParams p = toy_params();
  const CoefficientWindow w = build_window(p.tau, p.K, p.eps_n, 3ull);
  const ReplicationResult a = run_replication(p, w, 123);
  const ReplicationResult b = run_replication(p, w, 123);
  CHECK(a.l == b.l);
  CHECK(a.t == b.t);
  CHECK(a.t == normalize_statistic(a.l, p.n, p.p));
  const ReplicationResult c = run_replication(p, w, 124);
  CHECK(a.t != c.t);
  // Scanning at the literal model tau admits the window-overlap pairs, so it
  // is a different (larger) statistic.
  const ReplicationResult lit =
      run_replication(p, w, 123, 0, std::uint64_t{1} << 30, p.tau);
  CHECK(lit.l >= a.l);
  // A scan distance >= p leaves no pairs and is rejected.
  CHECK_THROWS_AS(run_replication(p, w, 123, 0, std::uint64_t{1} << 30, 40),
                  std::invalid_argument);
}

TEST_CASE("study samples are reproducible across thread counts") {
  StudyConfig cfg = toy_config(6, 2718);
  const McSampleSet one = run_study(cfg);
  cfg.threads = 4;
  const McSampleSet four = run_study(cfg);
  REQUIRE(one.t.size() == 6);
  CHECK(one.t == four.t);  // bitwise
  CHECK(one.l == four.l);
  CHECK(one.scan_tau == 5);
}

TEST_CASE("block size changes samples by at most 1e-12") {
  StudyConfig cfg = toy_config(4, 999);
  const McSampleSet a = run_study(cfg);
  cfg.block_size = 7;
  const McSampleSet b = run_study(cfg);
  for (std::size_t i = 0; i < a.t.size(); ++i)
    CHECK(std::fabs(a.t[i] - b.t[i]) <= 1e-12);
}

TEST_CASE("longer studies extend shorter ones sample-for-sample") {
  const McSampleSet small = run_study(toy_config(3, 5150));
  const McSampleSet large = run_study(toy_config(8, 5150));
  for (std::size_t i = 0; i < small.t.size(); ++i)
    CHECK(small.t[i] == large.t[i]);
}

TEST_CASE("window policy: shared by default, redraw and override change draws") {
  StudyConfig cfg = toy_config(3, 404);
  const McSampleSet shared = run_study(cfg);
  cfg.redraw_window = true;
  const McSampleSet redraw = run_study(cfg);
  CHECK(shared.t != redraw.t);

  cfg.redraw_window = false;
  cfg.window = build_window(cfg.params.tau, cfg.params.K, cfg.params.eps_n,
                            777ull);
  const McSampleSet overridden = run_study(cfg);
  CHECK(shared.t != overridden.t);

  cfg.window = build_window(cfg.params.tau + 1, cfg.params.K, cfg.params.eps_n,
                            777ull);
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
  cfg.window.reset();
  cfg.replications = 0;
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
}

TEST_CASE("sample CSV round trip is bit exact") {
  testutil::TempDir dir;
  const std::string path = dir.file("samples.csv");
  StudyConfig cfg = toy_config(5, 31337);
  cfg.scan_tau = 6;
  const McSampleSet out = run_study(cfg);
  write_samples_csv(path, out);
  const McSampleSet in = read_samples_csv(path);
  CHECK(in.params.n == out.params.n);
  CHECK(in.params.p == out.params.p);
  CHECK(in.params.tau == out.params.tau);
  CHECK(in.params.K == out.params.K);
  CHECK(in.params.eps_n == out.params.eps_n);
  CHECK(in.master_seed == out.master_seed);
  CHECK(in.replications == out.replications);
  CHECK(in.redraw_window == out.redraw_window);
  CHECK(in.scan_tau == 6);
  CHECK(in.t == out.t);  // %.17g preserves doubles exactly

  // Re-writing produces byte-identical files (nothing volatile in metadata).
  const std::string path2 = dir.file("samples2.csv");
  write_samples_csv(path2, out);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("sample CSV rejects malformed files") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(read_samples_csv(dir.file("missing.csv")),
                  std::runtime_error);

  const std::string no_meta = dir.file("no_meta.csv");
  std::ofstream(no_meta) << "1.5\n2.5\n";
  CHECK_THROWS_AS(read_samples_csv(no_meta), std::runtime_error);

  const std::string bad_count = dir.file("bad_count.csv");
  std::ofstream(bad_count)
      << "# {\"version\":\"1.0.0\",\"n\":50,\"p\":40,\"tau\":2,\"K\":3,"
         "\"eps_n\":0.1,\"scan_tau\":5,\"master_seed\":1,\"replications\":3,"
         "\"redraw_window\":false}\n1.0\n2.0\n";
  CHECK_THROWS_AS(read_samples_csv(bad_count), std::runtime_error);

  const std::string bad_line = dir.file("bad_line.csv");
  std::ofstream(bad_line)
      << "# {\"version\":\"1.0.0\",\"n\":50,\"p\":40,\"tau\":2,\"K\":3,"
         "\"eps_n\":0.1,\"scan_tau\":5,\"master_seed\":1,\"replications\":2,"
         "\"redraw_window\":false}\n1.0\nnot-a-number\n";
  CHECK_THROWS_AS(read_samples_csv(bad_line), std::runtime_error);
}

TEST_CASE("planted duplicate forces the maximal statistic") {
  // With L = 1 the normalized statistic is exactly n - 4 ln p + ln ln p.
  const std::int64_t n = 50, p = 40;
  CHECK(normalize_statistic(1.0, n, p) ==
        doctest::Approx(50.0 - 4.0 * std::log(40.0) +
                        std::log(std::log(40.0)))
            .epsilon(1e-15));
}

TEST_CASE("tail probability estimator") {
  const TailProbResult res = estimate_tail_probability(50, 30, 0.0, 0.0, 20000, 9, 1);
  CHECK(res.replications == 20000);
  CHECK(res.threshold == threshold_a_n(50, 30, 0.0));
  CHECK(res.p0 == asymptotic_tail_p0(50, 30, 0.0));
  CHECK(res.p_hat ==
        doctest::Approx(double(res.hits) / 20000.0).epsilon(1e-15));
  CHECK(res.half_width ==
        1.96 * std::sqrt(res.p_hat * (1.0 - res.p_hat) / 20000.0));
  CHECK(res.ratio == doctest::Approx(res.p_hat / res.p0).epsilon(1e-15));

  // Determinism, including across thread counts (integer count reduction).
  const TailProbResult again = estimate_tail_probability(50, 30, 0.0, 0.0, 20000, 9, 4);
  CHECK(again.hits == res.hits);

  // A threshold beyond the reachable range yields zero hits.
  const TailProbResult none = estimate_tail_probability(20, 30, 400.0, 0.0, 5000, 9, 1);
  CHECK(none.hits == 0);
  CHECK(none.half_width == 0.0);

  // Correlation widens the exceedance probability.
  const TailProbResult corr = estimate_tail_probability(50, 30, 0.0, 0.9, 20000, 9, 1);
  CHECK(corr.hits > res.hits);

  CHECK_THROWS_AS(estimate_tail_probability(50, 30, 0.0, 1.0, 1000, 9, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_tail_probability(50, 30, 0.0, -1.0, 1000, 9, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_tail_probability(0, 30, 0.0, 0.0, 1000, 9, 1),
                  std::invalid_argument);
}

}  // TEST_SUITE
