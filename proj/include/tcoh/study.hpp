#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcoh/model.hpp"
#include "tcoh/sampler.hpp"

namespace tcoh {

// Monte Carlo study of the normalized coherence statistic
// T = n L^2 - 4 ln p + ln ln p under the moving-average model. Replication r
// draws its latent matrix with seed splitmix64(master ^ (c*(r+1))), so sample
// r is a pure function of (master_seed, r): studies of different lengths share
// a common prefix and replications can run in any order on any thread count.
struct StudyConfig {
  ModelParams params;
  std::int64_t replications = 0;
  std::uint64_t master_seed = 0;
  // Window coefficients r_k are drawn once per study from the master seed;
  // with redraw_window each replication draws its own (both modes keep the
  // pure-function-of-(master, r) property).
  bool redraw_window = false;
  // Explicit window override (tests, reproducing a particular draw). Must be
  // compatible with params; redraw_window is ignored when set.
  std::optional<CoefficientWindow> window;
  int threads = 0;  // replication-level parallelism; 0 = resolve from env
  std::int64_t block_size = 0;       // per-replication scan block, 0 = auto
  std::uint64_t memory_budget = 1ull << 30;
  // Pair distance the scan requires: |k - j| >= scan_tau. The window's center
  // has width 2 tau + 1, so columns up to distance 2 tau share center
  // coefficients and carry true correlations comparable to a null maximum;
  // the coherence of generated data matches the limit law only beyond that
  // band. 0 (the default) uses 2 tau + 1. Setting scan_tau = params.tau
  // scans the narrower nominal band instead, where the statistic is dominated
  // by within-window pairs.
  std::int64_t scan_tau = 0;
};

// A replication that threw: its index, derived seed, and error text. Kept in
// the sample set (and the CSV metadata) so a partial study never hides which
// cells are missing or how to rerun them.
struct ReplicationFailure {
  std::int64_t rep = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct McSampleSet {
  ModelParams params;
  std::uint64_t master_seed = 0;
  std::int64_t replications = 0;  // attempted, = t.size() + failures.size()
  bool redraw_window = false;
  std::int64_t scan_tau = 0;  // distance actually scanned (resolved, not 0)
  std::vector<double> t;  // normalized statistic, successful replications in
                          // replication order
  std::vector<double> l;  // tau-coherence per success (not persisted)
  std::vector<ReplicationFailure> failures;
};

std::uint64_t replication_seed(std::uint64_t master_seed, std::int64_t rep);

// Scan distance for generated data: scan_tau when positive, else the
// window-induced band 2 tau + 1 (see StudyConfig::scan_tau).
inline std::int64_t effective_scan_tau(const ModelParams& params,
                                       std::int64_t scan_tau = 0) {
  return scan_tau > 0 ? scan_tau : 2 * params.tau + 1;
}

// One replication: sample X, scan at effective_scan_tau(params, scan_tau),
// normalize. Runs the scan single-threaded (parallelism belongs at the
// replication level).
struct ReplicationResult {
  double l = 0.0;
  double t = 0.0;
};
ReplicationResult run_replication(const ModelParams& params,
                                  const CoefficientWindow& window,
                                  std::uint64_t y_seed,
                                  std::int64_t block_size = 0,
                                  std::uint64_t memory_budget = 1ull << 30,
                                  std::int64_t scan_tau = 0);

// Runs the R replications (parallel over replications). Invalid
// configurations throw up front; a replication that throws mid-study is
// recorded in .failures with its seed and excluded from the samples, so one
// bad cell cannot void the rest of a long run.
McSampleSet run_study(const StudyConfig& config);

// Sample CSV: one '#'-prefixed JSON metadata line (parameters, seed, file
// version -- nothing volatile, so reruns produce byte-identical files), then
// one %.17g statistic per line.
void write_samples_csv(const std::string& path, const McSampleSet& samples);
McSampleSet read_samples_csv(const std::string& path);

// Monte Carlo estimate of P(|sum_i x_i y_i| > a_n(y)) for n i.i.d. pairs of
// standard normals with correlation rho, against the asymptotic value
// (1/sqrt(2 pi)) e^{-y/2} p^{-2}. Replication r uses stream r+1 of the seed.
struct TailProbResult {
  double p_hat = 0.0;
  double half_width = 0.0;  // 1.96 sqrt(p_hat (1 - p_hat) / reps), 95% CI
  double p0 = 0.0;
  double ratio = 0.0;      // p_hat / p0
  double threshold = 0.0;  // a_n(y)
  std::int64_t hits = 0;
  std::int64_t replications = 0;
};
TailProbResult estimate_tail_probability(std::int64_t n, std::int64_t p,
                                         double y, double rho,
                                         std::int64_t replications,
                                         std::uint64_t seed, int threads = 0);

}  // namespace tcoh
