#include "tcoh/coherence.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "tcoh/errors.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define TCOH_KERNEL_AVX2 1
#endif

namespace tcoh {

namespace {

constexpr std::int64_t kGroup = 8;  // columns per kernel call

// Dot products of column `a` against eight consecutive columns of b (leading
// dimension ld): out[l] = sum_i a[i] * b[l*ld + i].
//
// Reproducibility contract: the value of each lane is a pure function of
// (a, that b column, n) — fused multiply-adds over ascending i in chunks of
// four, a fixed-order horizontal sum, then a scalar fma tail. Lane position,
// packet shape and thread count never influence a pair's arithmetic, which is
// what makes the blockwise scan bit-identical across Tb and thread counts.
// The scalar fallback mirrors the vector arithmetic exactly (four explicit
// lanes with std::fma), so both paths produce identical bits.
#ifdef TCOH_KERNEL_AVX2
inline void dot8(const double* a, const double* b, std::int64_t ld,
                 std::int64_t n, double out[kGroup]) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
  __m256d acc4 = _mm256_setzero_pd(), acc5 = _mm256_setzero_pd();
  __m256d acc6 = _mm256_setzero_pd(), acc7 = _mm256_setzero_pd();
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    acc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 0 * ld + i), acc0);
    acc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 1 * ld + i), acc1);
    acc2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 2 * ld + i), acc2);
    acc3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 3 * ld + i), acc3);
    acc4 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 4 * ld + i), acc4);
    acc5 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 5 * ld + i), acc5);
    acc6 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 6 * ld + i), acc6);
    acc7 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 7 * ld + i), acc7);
  }
  double tail[kGroup] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (; i < n; ++i) {
    const double ai = a[i];
    for (int l = 0; l < kGroup; ++l)
      tail[l] = std::fma(ai, b[l * ld + i], tail[l]);
  }
  const __m256d accs[kGroup] = {acc0, acc1, acc2, acc3, acc4, acc5, acc6, acc7};
  for (int l = 0; l < kGroup; ++l) {
    alignas(32) double t[4];
    _mm256_store_pd(t, accs[l]);
    out[l] = ((t[0] + t[1]) + (t[2] + t[3])) + tail[l];
  }
}
#else
inline void dot8(const double* a, const double* b, std::int64_t ld,
                 std::int64_t n, double out[kGroup]) {
  double acc[kGroup][4] = {};
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int l = 0; l < kGroup; ++l)
      for (int q = 0; q < 4; ++q)
        acc[l][q] = std::fma(a[i + q], b[l * ld + i + q], acc[l][q]);
  double tail[kGroup] = {};
  for (; i < n; ++i)
    for (int l = 0; l < kGroup; ++l)
      tail[l] = std::fma(a[i], b[l * ld + i], tail[l]);
  for (int l = 0; l < kGroup; ++l)
    out[l] = ((acc[l][0] + acc[l][1]) + (acc[l][2] + acc[l][3])) + tail[l];
}
#endif

enum class Stat { corr, raw };

// Current best pair under the total order (value desc, k asc, j asc); using a
// total order makes the max reduction associative and commutative, so any
// merge order of thread-local results yields the same answer.
struct Best {
  double v = -1.0;
  std::int64_t k = -1, j = -1;  // 0-based global columns
};

inline bool better(const Best& cand, const Best& cur) {
  if (cand.v != cur.v) return cand.v > cur.v;
  if (cand.k != cur.k) return cand.k < cur.k;
  return cand.j < cur.j;
}

struct Packet {
  std::int64_t col0 = -1;
  std::int64_t count = 0;
  std::int64_t padded = 0;  // count rounded up to kGroup; extra columns zero
  std::vector<double> data;  // column-major, leading dimension n
  std::vector<ColumnSummary> summary;
};

// Fetch columns [col0, col0+count) and prepare them for the requested
// statistic: corr mode centers (or subtracts the supplied means) and divides
// by the norm so that the scan kernel's dot is the correlation directly; raw
// mode leaves values untouched. Degenerate columns are collected and the
// smallest offending index thrown after the parallel region, so the error is
// deterministic under any thread count.
void load_packet(const BlockSource& src, std::int64_t n, std::int64_t col0,
                 std::int64_t count, const ScanConfig& cfg, Stat stat,
                 int threads, Packet& pkt) {
  pkt.col0 = col0;
  pkt.count = count;
  pkt.padded = (count + kGroup - 1) / kGroup * kGroup;
  pkt.data.resize(static_cast<std::size_t>(n * pkt.padded));
  pkt.summary.resize(static_cast<std::size_t>(count));
  std::fill(pkt.data.begin() + n * count, pkt.data.end(), 0.0);
  src.fetch(col0, count, pkt.data.data(), n);

  std::vector<char> degenerate(static_cast<std::size_t>(count), 0);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t c = 0; c < count; ++c) {
    double* x = pkt.data.data() + c * n;
    ColumnSummary& s = pkt.summary[c];
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      sum += x[i];
      sumsq += x[i] * x[i];
    }
    s.mean = sum / static_cast<double>(n);
    s.raw_norm = std::sqrt(sumsq);
    const double shift = (cfg.mode == MeanMode::known && stat == Stat::corr)
                             ? cfg.mu[static_cast<std::size_t>(col0 + c)]
                             : s.mean;
    double csq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = x[i] - shift;
      csq += d * d;
    }
    const double cnorm = std::sqrt(csq);
    s.centered_norm = cnorm;  // norm about the shift actually applied
    if (stat == Stat::corr) {
      if (cnorm == 0.0) {
        degenerate[c] = 1;
      } else {
        for (std::int64_t i = 0; i < n; ++i) x[i] = (x[i] - shift) / cnorm;
      }
    }
  }
  for (std::int64_t c = 0; c < count; ++c) {
    if (degenerate[c]) {
      std::ostringstream msg;
      msg << "degenerate column " << col0 + c + 1
          << ": zero norm after shift, correlation undefined";
      throw DegenerateColumnError(col0 + c + 1, msg.str());
    }
  }
}

// Scan all pairs (k in A, j in B) with j - k >= tau. Kernel groups are
// aligned to the B buffer start; inadmissible or padded lanes are skipped
// after the fact, which wastes a handful of dots along the band boundary but
// keeps every pair's arithmetic identical no matter where the packet
// boundaries fall.
void scan_pair(const Packet& A, const Packet& B, std::int64_t n,
               std::int64_t tau, Stat stat, int threads, Best& best,
               std::int64_t& pairs) {
  const std::int64_t b_end = B.col0 + B.count;
#pragma omp parallel num_threads(threads)
  {
    Best local;
    std::int64_t cnt = 0;
#pragma omp for schedule(dynamic, 4) nowait
    for (std::int64_t kl = 0; kl < A.count; ++kl) {
      const std::int64_t k = A.col0 + kl;
      const std::int64_t j_min = k + tau;
      if (j_min >= b_end) continue;
      const std::int64_t jl_start = std::max<std::int64_t>(0, j_min - B.col0);
      const double* acol = A.data.data() + kl * n;
      for (std::int64_t g = jl_start / kGroup * kGroup; g < B.count; g += kGroup) {
        double vals[kGroup];
        dot8(acol, B.data.data() + g * n, n, n, vals);
        for (int l = 0; l < kGroup; ++l) {
          const std::int64_t jl = g + l;
          if (jl >= B.count || jl < jl_start) continue;
          ++cnt;
          double v = std::fabs(vals[l]);
          if (stat == Stat::corr && v > 1.0) v = 1.0;
          const Best cand{v, k, B.col0 + jl};
          if (better(cand, local)) local = cand;
        }
      }
    }
#pragma omp critical
    {
      if (better(local, best)) best = local;
      pairs += cnt;
    }
  }
}

CoherenceResult scan(const BlockSource& src, const ScanConfig& cfg, Stat stat) {
  const std::int64_t n = src.rows();
  const std::int64_t p = src.cols();
  if (n < 2) throw std::invalid_argument("coherence scan: n >= 2 required");
  if (p < 2) throw std::invalid_argument("coherence scan: p >= 2 required");
  if (cfg.tau < 1) throw std::invalid_argument("coherence scan: tau >= 1 required");
  if (cfg.tau >= p) {
    std::ostringstream msg;
    msg << "coherence scan: tau = " << cfg.tau << " >= p = " << p
        << ", no admissible pairs";
    throw std::invalid_argument(msg.str());
  }
  if (stat == Stat::corr && cfg.mode == MeanMode::known &&
      static_cast<std::int64_t>(cfg.mu.size()) != p)
    throw std::invalid_argument(
        "coherence scan: known-mean mode requires mu of length p");

  std::int64_t tb = cfg.block_size > 0
                        ? std::min(cfg.block_size, p)
                        : default_block_size(n, p, cfg.memory_budget);
  const int threads = resolve_threads(cfg.threads);
  const double t0 = omp_get_wtime();

  Best best;
  std::int64_t pairs = 0;
  Packet a, b;
  const std::int64_t nb = (p + tb - 1) / tb;
  for (std::int64_t ia = 0; ia < nb; ++ia) {
    const std::int64_t a0 = ia * tb;
    const std::int64_t ac = std::min(tb, p - a0);
    load_packet(src, n, a0, ac, cfg, stat, threads, a);
    scan_pair(a, a, n, cfg.tau, stat, threads, best, pairs);
    for (std::int64_t ib = ia + 1; ib < nb; ++ib) {
      const std::int64_t b0 = ib * tb;
      const std::int64_t bc = std::min(tb, p - b0);
      // skip packets entirely inside the central band
      if (b0 + bc - 1 < a0 + cfg.tau) continue;
      load_packet(src, n, b0, bc, cfg, stat, threads, b);
      scan_pair(a, b, n, cfg.tau, stat, threads, best, pairs);
    }
  }

  CoherenceResult res;
  res.mode = cfg.mode;
  res.block_size = tb;
  res.pairs_scanned = pairs;
  res.seconds = omp_get_wtime() - t0;
  res.threads = threads;
  res.argmax_k = best.k + 1;
  res.argmax_j = best.j + 1;
  if (stat == Stat::corr) {
    res.l_n_tau = best.v;
  } else {
    res.v_n_tau = best.v;
  }
  return res;
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TCOH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  return omp_get_max_threads();
}

ColumnSummary column_summary(const double* x, std::int64_t n) {
  ColumnSummary s;
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    sum += x[i];
    sumsq += x[i] * x[i];
  }
  s.mean = sum / static_cast<double>(n);
  s.raw_norm = std::sqrt(sumsq);
  double csq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = x[i] - s.mean;
    csq += d * d;
  }
  s.centered_norm = std::sqrt(csq);
  return s;
}

double pearson(std::span<const double> x, std::span<const double> y,
               MeanMode mode, double mu_x, double mu_y) {
  if (x.size() != y.size())
    throw std::invalid_argument("pearson: length mismatch");
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (n < 2) throw std::invalid_argument("pearson: n >= 2 required");
  double sx = mu_x, sy = mu_y;
  if (mode == MeanMode::centered) {
    double ax = 0.0, ay = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      ax += x[i];
      ay += y[i];
    }
    sx = ax / static_cast<double>(n);
    sy = ay / static_cast<double>(n);
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double dx = x[i] - sx;
    const double dy = y[i] - sy;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0)
    throw DegenerateColumnError(1, "pearson: first column has zero norm");
  if (syy == 0.0)
    throw DegenerateColumnError(2, "pearson: second column has zero norm");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

std::int64_t default_block_size(std::int64_t n, std::int64_t p,
                                std::uint64_t memory_budget) {
  // largest Tb with 8*(2*n*Tb + Tb^2) <= budget
  const double m = static_cast<double>(memory_budget) / 8.0;
  const double nd = static_cast<double>(n);
  const double tb = std::floor(std::sqrt(nd * nd + m) - nd);
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(tb), 1, p);
}

CoherenceResult tau_coherence_blockwise(const BlockSource& source,
                                        const ScanConfig& config) {
  return scan(source, config, Stat::corr);
}

CoherenceResult v_statistic_result(const BlockSource& source,
                                   const ScanConfig& config) {
  return scan(source, config, Stat::raw);
}

double v_statistic(const BlockSource& source, const ScanConfig& config) {
  return *v_statistic_result(source, config).v_n_tau;
}

CoherenceResult tau_coherence_naive(const Matrix& m, std::int64_t tau,
                                    MeanMode mode,
                                    const std::vector<double>& mu) {
  const std::int64_t n = m.n, p = m.p;
  if (n < 2) throw std::invalid_argument("tau_coherence_naive: n >= 2 required");
  if (tau < 1 || tau >= p)
    throw std::invalid_argument("tau_coherence_naive: 1 <= tau < p required");
  if (mode == MeanMode::known && static_cast<std::int64_t>(mu.size()) != p)
    throw std::invalid_argument("tau_coherence_naive: mu of length p required");

  // Plain scalar preparation and dot products, in index order throughout.
  Matrix u(n, p);
  for (std::int64_t j = 0; j < p; ++j) {
    const double* x = m.col(j);
    double shift;
    if (mode == MeanMode::known) {
      shift = mu[static_cast<std::size_t>(j)];
    } else {
      double sum = 0.0;
      for (std::int64_t i = 0; i < n; ++i) sum += x[i];
      shift = sum / static_cast<double>(n);
    }
    double csq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = x[i] - shift;
      csq += d * d;
    }
    if (csq == 0.0) {
      std::ostringstream msg;
      msg << "degenerate column " << j + 1
          << ": zero norm after shift, correlation undefined";
      throw DegenerateColumnError(j + 1, msg.str());
    }
    const double cnorm = std::sqrt(csq);
    double* out = u.col(j);
    for (std::int64_t i = 0; i < n; ++i) out[i] = (x[i] - shift) / cnorm;
  }

  Best best;
  std::int64_t pairs = 0;
  for (std::int64_t k = 0; k < p; ++k) {
    const double* a = u.col(k);
    for (std::int64_t j = k + tau; j < p; ++j) {
      const double* b = u.col(j);
      double dot = 0.0;
      for (std::int64_t i = 0; i < n; ++i) dot += a[i] * b[i];
      ++pairs;
      double v = std::fabs(dot);
      if (v > 1.0) v = 1.0;
      const Best cand{v, k, j};
      if (better(cand, best)) best = cand;
    }
  }

  CoherenceResult res;
  res.mode = mode;
  res.block_size = p;
  res.pairs_scanned = pairs;
  res.threads = 1;
  res.l_n_tau = best.v;
  res.argmax_k = best.k + 1;
  res.argmax_j = best.j + 1;
  return res;
}

JiangReport jiang_diagnostics(const Matrix& m, std::int64_t tau, int threads) {
  const std::int64_t n = m.n, p = m.p;
  if (n < 2) throw std::invalid_argument("jiang_diagnostics: n >= 2 required");
  if (tau < 1 || tau >= p)
    throw std::invalid_argument("jiang_diagnostics: 1 <= tau < p required");
  const int nt = resolve_threads(threads);

  const std::int64_t padded = (p + kGroup - 1) / kGroup * kGroup;
  // u: centered columns scaled by 1/norm; x: raw columns (both zero-padded)
  std::vector<double> u(static_cast<std::size_t>(n * padded), 0.0);
  std::vector<double> x(static_cast<std::size_t>(n * padded), 0.0);
  std::vector<double> mean(static_cast<std::size_t>(p));
  std::vector<double> h(static_cast<std::size_t>(p));
  std::vector<char> degenerate(static_cast<std::size_t>(p), 0);
  const double sqrt_n = std::sqrt(static_cast<double>(n));

#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t j = 0; j < p; ++j) {
    const double* src = m.col(j);
    double* xc = x.data() + j * n;
    double* uc = u.data() + j * n;
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      xc[i] = src[i];
      sum += src[i];
    }
    const double mu = sum / static_cast<double>(n);
    mean[j] = mu;
    double csq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = src[i] - mu;
      csq += d * d;
    }
    const double cnorm = std::sqrt(csq);
    h[j] = cnorm / sqrt_n;
    if (cnorm == 0.0) {
      degenerate[j] = 1;
    } else {
      for (std::int64_t i = 0; i < n; ++i) uc[i] = (src[i] - mu) / cnorm;
    }
  }
  for (std::int64_t j = 0; j < p; ++j)
    if (degenerate[j]) {
      std::ostringstream msg;
      msg << "degenerate column " << j + 1
          << ": zero centered norm, correlation undefined";
      throw DegenerateColumnError(j + 1, msg.str());
    }

  double max_rho = 0.0, max_raw = 0.0, max_diff = 0.0;
  std::int64_t pairs = 0;
  const double nd = static_cast<double>(n);
#pragma omp parallel num_threads(nt)
  {
    double lrho = 0.0, lraw = 0.0, ldiff = 0.0;
    std::int64_t cnt = 0;
#pragma omp for schedule(dynamic, 4) nowait
    for (std::int64_t k = 0; k < p - tau; ++k) {
      const double* uk = u.data() + k * n;
      const double* xk = x.data() + k * n;
      const std::int64_t j_min = k + tau;
      for (std::int64_t g = j_min / kGroup * kGroup; g < p; g += kGroup) {
        double rho[kGroup], raw[kGroup];
        dot8(uk, u.data() + g * n, n, n, rho);
        dot8(xk, x.data() + g * n, n, n, raw);
        for (int l = 0; l < kGroup; ++l) {
          const std::int64_t j = g + l;
          if (j >= p || j < j_min) continue;
          ++cnt;
          lrho = std::max(lrho, std::min(std::fabs(rho[l]), 1.0));
          lraw = std::max(lraw, std::fabs(raw[l]));
          ldiff = std::max(ldiff, std::fabs(nd * rho[l] - raw[l]));
        }
      }
    }
#pragma omp critical
    {
      max_rho = std::max(max_rho, lrho);
      max_raw = std::max(max_raw, lraw);
      max_diff = std::max(max_diff, ldiff);
      pairs += cnt;
    }
  }

  JiangReport rep;
  rep.l_n_tau = max_rho;
  rep.v_n_tau = max_raw;
  rep.lhs = max_diff;
  rep.pairs_scanned = pairs;
  double c1 = 0.0, c2 = h[0], c3 = 0.0;
  for (std::int64_t j = 0; j < p; ++j) {
    c1 = std::max(c1, std::fabs(h[j] - 1.0));
    c2 = std::min(c2, h[j]);
    c3 = std::max(c3, std::fabs(mean[j]));
  }
  rep.c1 = c1;
  rep.c2 = c2;
  rep.c3 = c3;
  rep.rhs = ((c1 * c1 + 2.0 * c1) / (c2 * c2)) * max_raw +
            nd * (c3 / c2) * (c3 / c2);
  rep.delta_n = std::fabs(nd * max_rho - max_raw);
  rep.prop1 = (nd * nd * max_rho * max_rho - max_raw * max_raw) / nd;
  return rep;
}

}  // namespace tcoh
