#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcoh/matrix.hpp"

namespace tcoh {

// Which column shift Pearson correlation uses: empirical means (the classical
// coefficient) or externally supplied means.
enum class MeanMode { centered, known };

struct ScanConfig {
  std::int64_t tau = 1;
  // Columns per packet; 0 selects the largest Tb such that two n x Tb packets
  // plus one Tb x Tb correlation block fit in memory_budget.
  std::int64_t block_size = 0;
  std::uint64_t memory_budget = std::uint64_t{1} << 30;  // bytes, default 1 GiB
  // 0 resolves through the TCOH_THREADS environment variable, then OpenMP.
  int threads = 0;
  MeanMode mode = MeanMode::centered;
  std::vector<double> mu;  // column means, required iff mode == known
};

struct CoherenceResult {
  double l_n_tau = 0.0;                     // max |rho| over pairs j-k >= tau
  std::int64_t argmax_k = 0, argmax_j = 0;  // attaining pair, 1-based
  std::optional<double> v_n_tau;            // max |raw inner product|, if computed
  MeanMode mode = MeanMode::centered;
  std::int64_t block_size = 0;
  std::int64_t pairs_scanned = 0;  // = |I_K| + |I_0| for exhaustive scans
  double seconds = 0.0;
  int threads = 1;
};

struct ColumnSummary {
  double mean = 0.0;
  double centered_norm = 0.0;  // ||x - mean||
  double raw_norm = 0.0;       // ||x||
};

ColumnSummary column_summary(const double* x, std::int64_t n);

// Quantities of the norm-comparison bound between n*R_n and the raw Gram
// matrix, plus the convergence diagnostic (n^2 L^2 - V^2)/n.
struct JiangReport {
  double c1 = 0.0;  // max_k |h_k - 1|, h_k = ||x^k - mean||/sqrt(n)
  double c2 = 0.0;  // min_k h_k
  double c3 = 0.0;  // max_k |mean_k|
  double lhs = 0.0;  // max_{j-k >= tau} |n rho_kj - <x^k, x^j>|
  double rhs = 0.0;  // ((c1^2 + 2 c1)/c2^2) V + n (c3/c2)^2
  double delta_n = 0.0;  // |n L - V|
  double prop1 = 0.0;    // (n^2 L^2 - V^2)/n
  double l_n_tau = 0.0;
  double v_n_tau = 0.0;
  std::int64_t pairs_scanned = 0;
};

// Pearson correlation of two columns, textbook accumulation in index order
// (serves as the arithmetic-independent oracle for the scan kernels).
// Throws DegenerateColumnError (column 1 for x, 2 for y) on zero norms.
double pearson(std::span<const double> x, std::span<const double> y,
               MeanMode mode = MeanMode::centered, double mu_x = 0.0,
               double mu_y = 0.0);

// Largest Tb with 8*(2*n*Tb + Tb^2) <= memory_budget, clamped to [1, p].
std::int64_t default_block_size(std::int64_t n, std::int64_t p,
                                std::uint64_t memory_budget);

// Blockwise tau-coherence: iterates packet pairs, scanning all column pairs
// at distance >= tau. Memory high-water mark O(n*Tb); bit-identical results
// across thread counts and across block sizes. Ties in the max are broken by
// smallest k, then smallest j.
CoherenceResult tau_coherence_blockwise(const BlockSource& source,
                                        const ScanConfig& config);

// Serial reference implementation: direct double loop with plain scalar
// accumulation, same tie-breaking. Oracle for the blockwise engine.
CoherenceResult tau_coherence_naive(const Matrix& m, std::int64_t tau,
                                    MeanMode mode = MeanMode::centered,
                                    const std::vector<double>& mu = {});

// Max |<x^k, x^j>| (uncentered, unnormalized) over pairs j-k >= tau, same
// packet strategy. The full scan result (argmax etc.) via the _result form;
// the value lands in v_n_tau and l_n_tau is left at 0.
double v_statistic(const BlockSource& source, const ScanConfig& config);
CoherenceResult v_statistic_result(const BlockSource& source,
                                   const ScanConfig& config);

// In-memory diagnostic pass computing the norm-bound quantities and the
// convergence diagnostic; needs two dense copies of the matrix.
JiangReport jiang_diagnostics(const Matrix& m, std::int64_t tau,
                              int threads = 0);

// threads > 0: as given; else TCOH_THREADS env var; else OpenMP default.
int resolve_threads(int requested);

}  // namespace tcoh
