#include "tcoh/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tcoh/errors.hpp"
#include "tcoh/rng.hpp"

namespace tcoh {

namespace {

void check_window_shape(std::int64_t tau, std::int64_t K, double eps_n) {
  if (tau < 1) throw std::invalid_argument("build_window: tau >= 1 required");
  if (K < 0) throw std::invalid_argument("build_window: K >= 0 required");
  if (!(std::abs(eps_n) <= 1.0))
    throw std::invalid_argument("build_window: |eps_n| <= 1 required");
}

CoefficientWindow assemble(std::int64_t tau, std::int64_t K, double eps_n,
                           std::vector<double> r, bool normalize) {
  CoefficientWindow w;
  w.tau = tau;
  w.K = K;
  w.eps_n = eps_n;
  w.r = std::move(r);
  w.c.resize(static_cast<std::size_t>(2 * tau + 2 * K + 1));
  for (std::int64_t m = 0; m < K; ++m) w.c[m] = eps_n;
  for (std::int64_t i = 0; i < 2 * tau + 1; ++i) w.c[K + i] = w.r[i];
  for (std::int64_t m = 0; m < K; ++m) w.c[K + 2 * tau + 1 + m] = eps_n;
  if (normalize) {
    double g0 = 0.0;
    for (double v : w.c) g0 += v * v;
    if (!(g0 > 0.0))
      throw std::invalid_argument("build_window: cannot normalize a zero window");
    const double scale = 1.0 / std::sqrt(g0);
    for (double& v : w.c) v *= scale;
  }
  return w;
}

// out[i] += a * x[i]; the one place moving-average accumulation happens, so
// every code path sums window terms in identical order.
inline void axpy(double* out, const double* x, double a, std::int64_t count) {
  for (std::int64_t i = 0; i < count; ++i) out[i] += a * x[i];
}

}  // namespace

CoefficientWindow build_window(std::int64_t tau, std::int64_t K, double eps_n,
                               const std::vector<double>& r, bool normalize) {
  check_window_shape(tau, K, eps_n);
  if (static_cast<std::int64_t>(r.size()) != 2 * tau + 1) {
    std::ostringstream msg;
    msg << "build_window: r must have length 2*tau+1 = " << 2 * tau + 1
        << ", got " << r.size();
    throw std::invalid_argument(msg.str());
  }
  for (double v : r)
    if (!(v >= -1.0 && v <= 1.0))
      throw std::invalid_argument("build_window: r entries must lie in [-1,1]");
  return assemble(tau, K, eps_n, r, normalize);
}

CoefficientWindow build_window(std::int64_t tau, std::int64_t K, double eps_n,
                               std::uint64_t seed, bool normalize) {
  check_window_shape(tau, K, eps_n);
  std::vector<double> r(static_cast<std::size_t>(2 * tau + 1));
  for (std::int64_t i = 0; i < 2 * tau + 1; ++i)
    r[i] = rng::uniform_pm1(seed, kWindowStream, static_cast<std::uint64_t>(i));
  return assemble(tau, K, eps_n, std::move(r), normalize);
}

double implied_autocovariance(const CoefficientWindow& window, std::int64_t h) {
  if (h < 0) throw std::invalid_argument("implied_autocovariance: h >= 0 required");
  const std::int64_t len = static_cast<std::int64_t>(window.c.size());
  if (h >= len) return 0.0;
  double acc = 0.0;
  for (std::int64_t m = 0; m + h < len; ++m) acc += window.c[m] * window.c[m + h];
  return acc;
}

MaSampler::MaSampler(const ModelParams& params, CoefficientWindow window,
                     std::uint64_t seed)
    : params_(params), window_(std::move(window)), seed_(seed) {
  params_.validate();
  if (!window_.compatible_with(params_))
    throw std::invalid_argument(
        "MaSampler: window (tau, K, eps_n) must match params");
  if (window_.c.size() != static_cast<std::size_t>(2 * params_.tau + 2 * params_.K + 1))
    throw std::invalid_argument("MaSampler: malformed coefficient vector");
}

void MaSampler::fetch(std::int64_t col0, std::int64_t count, double* dst,
                      std::int64_t ld) const {
  fetch_block(0, params_.n, col0, col0 + count, dst, ld);
}

void MaSampler::fetch_block(std::int64_t row0, std::int64_t row1,
                            std::int64_t col0, std::int64_t col1, double* dst,
                            std::int64_t ld) const {
  if (row0 < 0 || row1 > params_.n || row0 >= row1)
    throw std::invalid_argument("MaSampler: row range out of bounds");
  if (col0 < 0 || col1 > params_.p || col0 >= col1)
    throw std::invalid_argument("MaSampler: column range out of bounds");
  const std::int64_t nrows = row1 - row0;
  if (ld < nrows) throw std::invalid_argument("MaSampler: ld < rows");

  const std::int64_t len = static_cast<std::int64_t>(window_.c.size());
  // Bounded scratch: expand Y for a slice of output columns at a time. The
  // slice boundary never affects values (each output entry always sums its
  // window in m-order), only how much of Y is alive at once.
  const std::int64_t slice = std::max<std::int64_t>(512, 2 * len);
  std::vector<double> scratch;
  for (std::int64_t s0 = col0; s0 < col1; s0 += slice) {
    const std::int64_t s1 = std::min(col1, s0 + slice);
    const std::int64_t ycount = (s1 - s0) + len - 1;
    scratch.assign(static_cast<std::size_t>(ycount * nrows), 0.0);
    // Y column for output column j, offset m is global Y index j+m; stream
    // ids are 1-based (stream 0 is the window stream), counter is the row.
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < ycount; ++q) {
      const std::uint64_t stream = static_cast<std::uint64_t>(s0 + q) + 1;
      rng::normal_fill(seed_, stream, static_cast<std::uint64_t>(row0), nrows,
                       scratch.data() + q * nrows);
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t j = s0; j < s1; ++j) {
      double* out = dst + (j - col0) * ld;
      std::fill(out, out + nrows, 0.0);
      for (std::int64_t m = 0; m < len; ++m)
        axpy(out, scratch.data() + (j - s0 + m) * nrows, window_.c[m], nrows);
    }
  }
}

Matrix sample_ma(const ModelParams& params, const CoefficientWindow& window,
                 std::uint64_t seed, std::int64_t row0, std::int64_t row1,
                 std::int64_t col0, std::int64_t col1) {
  MaSampler sampler(params, window, seed);
  Matrix m(row1 - row0, col1 - col0);
  sampler.fetch_block(row0, row1, col0, col1, m.data.data(), m.n);
  return m;
}

Matrix sample_ma(const ModelParams& params, const CoefficientWindow& window,
                 std::uint64_t seed) {
  return sample_ma(params, window, seed, 0, params.n, 0, params.p);
}

double sigma_entry(const SigmaSpec& spec, std::int64_t k, std::int64_t j,
                   std::int64_t p) {
  if (k < 1 || k > p || j < 1 || j > p)
    throw std::invalid_argument("sigma_entry: indices must lie in [1,p]");
  const auto scale = [&](std::int64_t idx) {
    if (spec.sigma.empty()) return 1.0;
    return spec.sigma.at(static_cast<std::size_t>(idx - 1));
  };
  const std::int64_t d = std::abs(k - j);
  if (d == 0) return scale(k) * scale(k);
  if (d < spec.tau) {
    if (!spec.gamma_band)
      throw std::invalid_argument(
          "sigma_entry: gamma_band accessor required for in-band pairs");
    return spec.gamma_band(k, j) * scale(k) * scale(j);
  }
  if (d <= spec.tau + spec.K) return spec.eps_n * scale(k) * scale(j);
  return 0.0;
}

Matrix sample_cholesky(const SigmaSpec& spec, std::int64_t n, std::int64_t p,
                       std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_cholesky: n >= 1 required");
  if (p < 1 || p > 4096)
    throw std::invalid_argument("sample_cholesky: 1 <= p <= 4096 required");
  if (!spec.sigma.empty() && static_cast<std::int64_t>(spec.sigma.size()) < p)
    throw std::invalid_argument("sample_cholesky: sigma shorter than p");

  // Materialize Sigma, then factor it in place into the lower triangle.
  std::vector<double> a(static_cast<std::size_t>(p * p));
  for (std::int64_t k = 1; k <= p; ++k)
    for (std::int64_t j = 1; j <= p; ++j)
      a[(k - 1) * p + (j - 1)] = sigma_entry(spec, k, j, p);

  for (std::int64_t j = 0; j < p; ++j) {
    double d = a[j * p + j];
    for (std::int64_t m = 0; m < j; ++m) d -= a[j * p + m] * a[j * p + m];
    if (!(d > 0.0)) {
      std::ostringstream msg;
      msg << "sample_cholesky: Sigma is not positive definite; leading minor "
          << j + 1 << " has non-positive pivot " << d;
      throw FactorizationError(j + 1, msg.str());
    }
    const double root = std::sqrt(d);
    a[j * p + j] = root;
    for (std::int64_t i = j + 1; i < p; ++i) {
      double s = a[i * p + j];
      for (std::int64_t m = 0; m < j; ++m) s -= a[i * p + m] * a[j * p + m];
      a[i * p + j] = s / root;
    }
  }

  // X_i = L z_i with z_i i.i.d. standard normal; row i draws from stream i+1.
  Matrix x(n, p);
  std::vector<double> z(static_cast<std::size_t>(p));
#pragma omp parallel for schedule(static) firstprivate(z)
  for (std::int64_t i = 0; i < n; ++i) {
    rng::normal_fill(seed, static_cast<std::uint64_t>(i) + 1, 0, p, z.data());
    for (std::int64_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::int64_t m = 0; m <= j; ++m) s += a[j * p + m] * z[m];
      x.at(i, j) = s;
    }
  }
  return x;
}

}  // namespace tcoh
