#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tcoh/matrix.hpp"
#include "tcoh/model.hpp"

namespace tcoh {

// Moving-average coefficient window. Column j of the observation matrix is
// X^j = sum_m c_m Y^{j+m-1} over a latent i.i.d. N(0,1) matrix Y with
// p + 2tau + 2K columns, where c has layout
//   (eps_n x K, r_1 .. r_{2tau+1}, eps_n x K),   length 2tau + 2K + 1,
// and the central r are i.i.d. uniform on [-1,1]. Columns at distance
// h share window coefficients, inducing autocovariance sum_m c_m c_{m+h}
// (support up to 2tau+2K).
struct CoefficientWindow {
  std::int64_t tau = 1;
  std::int64_t K = 0;
  double eps_n = 0.0;
  std::vector<double> r;  // length 2tau+1, entries in [-1,1]
  std::vector<double> c;  // length 2tau+2K+1

  bool compatible_with(const ModelParams& params) const {
    return tau == params.tau && K == params.K && eps_n == params.eps_n;
  }
};

// Stream id reserved for window coefficient draws (Y columns use ids >= 1).
inline constexpr std::uint64_t kWindowStream = 0;

// Assemble a window from an explicit central coefficient vector r
// (length 2tau+1, entries in [-1,1]; rejected otherwise). Columns are not
// unit-variance by default; with normalize the assembled c is scaled by
// 1/sqrt(sum c_m^2) so the implied lag-0 autocovariance is exactly 1
// (covariance-level checks). r keeps the raw draws either way.
CoefficientWindow build_window(std::int64_t tau, std::int64_t K, double eps_n,
                               const std::vector<double>& r,
                               bool normalize = false);

// Assemble a window drawing r_i = uniform_pm1(seed, kWindowStream, i),
// i = 0..2tau. Same seed gives identical coefficients on every platform.
CoefficientWindow build_window(std::int64_t tau, std::int64_t K, double eps_n,
                               std::uint64_t seed, bool normalize = false);

// Autocovariance implied by the window at lag h >= 0: sum_m c_m c_{m+h},
// zero beyond the window support (h > 2tau+2K).
double implied_autocovariance(const CoefficientWindow& window, std::int64_t h);

// Random-access generator for the moving-average scheme. Any block of X is a
// pure function of (seed, block coordinates): the needed Y columns are
// re-expanded from the counter RNG on demand (Y_i^k lives at stream k+1,
// counter i), so overlapping requests agree bit-exactly and nothing needs to
// be stored.
class MaSampler final : public BlockSource {
 public:
  // Rejects invalid params and windows inconsistent with params.
  MaSampler(const ModelParams& params, CoefficientWindow window,
            std::uint64_t seed);

  std::int64_t rows() const override { return params_.n; }
  std::int64_t cols() const override { return params_.p; }
  void fetch(std::int64_t col0, std::int64_t count, double* dst,
             std::int64_t ld) const override;

  // General block: rows [row0, row1) x columns [col0, col1), 0-based,
  // column-major output with leading dimension ld >= row1-row0.
  void fetch_block(std::int64_t row0, std::int64_t row1, std::int64_t col0,
                   std::int64_t col1, double* dst, std::int64_t ld) const;

  const ModelParams& params() const { return params_; }
  const CoefficientWindow& window() const { return window_; }
  std::uint64_t seed() const { return seed_; }

 private:
  ModelParams params_;
  CoefficientWindow window_;
  std::uint64_t seed_;
};

// Convenience wrapper: the requested block as a Matrix.
Matrix sample_ma(const ModelParams& params, const CoefficientWindow& window,
                 std::uint64_t seed, std::int64_t row0, std::int64_t row1,
                 std::int64_t col0, std::int64_t col1);

// Full matrix.
Matrix sample_ma(const ModelParams& params, const CoefficientWindow& window,
                 std::uint64_t seed);

// Covariance specification of the banded model:
//   sigma_kj = sigma_k^2                    if k == j
//            = gamma_band(k,j) sigma_k sigma_j  if 0 < |k-j| < tau
//            = eps_n sigma_k sigma_j        if tau <= |k-j| <= tau+K
//            = 0                            if |k-j| > tau+K.
struct SigmaSpec {
  std::int64_t tau = 1;
  std::int64_t K = 0;
  double eps_n = 0.0;
  // Consulted only for 0 < |k-j| < tau (1-based indices); may be empty when
  // tau == 1. The diagonal is fixed at gamma_kk = 1.
  std::function<double(std::int64_t, std::int64_t)> gamma_band;
  // Per-column scales; empty means all ones.
  std::vector<double> sigma;
};

// Entry (k,j) of Sigma, 1-based. Rejects out-of-range indices.
double sigma_entry(const SigmaSpec& spec, std::int64_t k, std::int64_t j,
                   std::int64_t p);

// n i.i.d. rows with covariance exactly Sigma, via a Cholesky factorization
// of the materialized p x p matrix (guard: p <= 4096). Throws
// FactorizationError with the offending leading minor index when Sigma is not
// positive definite.
Matrix sample_cholesky(const SigmaSpec& spec, std::int64_t n, std::int64_t p,
                       std::uint64_t seed);

}  // namespace tcoh
