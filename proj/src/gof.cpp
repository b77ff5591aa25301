#include "tcoh/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tcoh/limitlaw.hpp"

namespace tcoh {

namespace {

constexpr double kTailQuantile = 1e-5;    // integration domain coverage
constexpr double kMassWarnLevel = 1e-4;   // tail-mass warning threshold

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty())
    throw std::invalid_argument("quantile_sorted: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile_sorted: q in [0,1] required");
  const std::size_t m = sorted.size();
  const double h = q * static_cast<double>(m - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= m) return sorted[m - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double ecdf_ks_limit(std::vector<double> samples) {
  if (samples.empty())
    throw std::invalid_argument("ecdf_ks_limit: empty sample");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = limit_cdf(samples[i]);
    const double below = f - static_cast<double>(i) / m;
    const double above = static_cast<double>(i + 1) / m - f;
    d = std::max(d, std::max(below, above));
  }
  return d;
}

KdeEstimate gaussian_kde(const std::vector<double>& samples,
                         std::int64_t grid_points, double bandwidth_override) {
  const std::size_t m = samples.size();
  if (m < 2)
    throw std::invalid_argument("gaussian_kde: at least two samples required");
  if (grid_points < 2)
    throw std::invalid_argument("gaussian_kde: grid_points >= 2 required");
  if (bandwidth_override < 0.0)
    throw std::invalid_argument(
        "gaussian_kde: bandwidth must be positive (zero selects the rule)");

  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  double h = bandwidth_override;
  if (h == 0.0) {
    double mean = 0.0;
    for (const double v : sorted) mean += v;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (const double v : sorted) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));
    const double iqr =
        quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double scale = std::min(sd, iqr / 1.34);
    if (scale == 0.0) scale = sd;  // IQR collapses under heavy ties
    h = 0.9 * scale * std::pow(static_cast<double>(m), -0.2);
  }
  if (!(h > 0.0))
    throw std::invalid_argument(
        "gaussian_kde: degenerate sample (zero bandwidth)");

  KdeEstimate kde;
  kde.bandwidth = h;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double dx = (hi - lo) / static_cast<double>(grid_points - 1);
  kde.grid.resize(static_cast<std::size_t>(grid_points));
  kde.density.assign(static_cast<std::size_t>(grid_points), 0.0);
  const double norm =
      1.0 / (static_cast<double>(m) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::int64_t g = 0; g < grid_points; ++g) {
    const double x = lo + static_cast<double>(g) * dx;
    kde.grid[static_cast<std::size_t>(g)] = x;
    double acc = 0.0;
    for (const double v : sorted) {
      const double u = (x - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    kde.density[static_cast<std::size_t>(g)] = norm * acc;
  }
  return kde;
}

DensityDistances density_distances(const KdeEstimate& kde) {
  if (kde.grid.size() < 2 || kde.grid.size() != kde.density.size())
    throw std::invalid_argument("density_distances: malformed estimate");
  const double dx = kde.grid[1] - kde.grid[0];
  if (!(dx > 0.0))
    throw std::invalid_argument("density_distances: grid not increasing");

  const double q_lo = limit_quantile(kTailQuantile);
  const double q_hi = limit_quantile(1.0 - kTailQuantile);
  const double g_lo = kde.grid.front();
  const double g_hi = kde.grid.back();
  const std::int64_t ext_lo =
      g_lo > q_lo ? static_cast<std::int64_t>(std::ceil((g_lo - q_lo) / dx)) : 0;
  const std::int64_t ext_hi =
      g_hi < q_hi ? static_cast<std::int64_t>(std::ceil((q_hi - g_hi) / dx)) : 0;

  std::vector<double> xs, fhat;
  xs.reserve(kde.grid.size() + static_cast<std::size_t>(ext_lo + ext_hi));
  fhat.reserve(xs.capacity());
  for (std::int64_t k = ext_lo; k >= 1; --k) {
    xs.push_back(g_lo - static_cast<double>(k) * dx);
    fhat.push_back(0.0);
  }
  xs.insert(xs.end(), kde.grid.begin(), kde.grid.end());
  fhat.insert(fhat.end(), kde.density.begin(), kde.density.end());
  for (std::int64_t k = 1; k <= ext_hi; ++k) {
    xs.push_back(g_hi + static_cast<double>(k) * dx);
    fhat.push_back(0.0);
  }

  std::vector<double> sq(xs.size()), ab(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = fhat[i] - limit_pdf(xs[i]);
    sq[i] = diff * diff;
    ab[i] = std::fabs(diff);
  }
  DensityDistances d;
  d.d_l2 = trapezoid(xs, sq);
  d.d_tv = 0.5 * trapezoid(xs, ab);
  d.kde_mass = trapezoid(kde.grid, kde.density);
  d.limit_mass = limit_cdf(xs.back()) - limit_cdf(xs.front());
  return d;
}

GofReport gof_against_limit(const std::vector<double>& samples,
                            std::int64_t grid_points,
                            double bandwidth_override) {
  if (samples.empty())
    throw std::invalid_argument("gof_against_limit: empty sample");
  GofReport rep;
  rep.count = static_cast<std::int64_t>(samples.size());
  rep.d_ks = ecdf_ks_limit(samples);
  rep.limit_mean_value = limit_mean();
  rep.limit_median_value = limit_quantile(0.5);

  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (const double v : sorted) mean += v;
  rep.sample_mean = mean / static_cast<double>(sorted.size());
  rep.sample_median = quantile_sorted(sorted, 0.5);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.d_l2 = nan;
  rep.d_tv = nan;
  rep.bandwidth = nan;
  if (samples.size() < 2) {
    rep.warnings.push_back(
        "density distances skipped: need at least two samples");
    return rep;
  }
  try {
    const KdeEstimate kde = gaussian_kde(samples, grid_points, bandwidth_override);
    const DensityDistances d = density_distances(kde);
    rep.bandwidth = kde.bandwidth;
    rep.d_l2 = d.d_l2;
    rep.d_tv = d.d_tv;
    if (std::fabs(d.kde_mass - 1.0) > kMassWarnLevel) {
      std::ostringstream msg;
      msg << "density estimate mass on grid is " << d.kde_mass
          << "; distances may be biased";
      rep.warnings.push_back(msg.str());
    }
    if (1.0 - d.limit_mass > kMassWarnLevel) {
      std::ostringstream msg;
      msg << "limit-law mass outside integration domain is "
          << 1.0 - d.limit_mass << "; distances may be biased";
      rep.warnings.push_back(msg.str());
    }
  } catch (const std::invalid_argument& e) {
    rep.warnings.push_back(std::string("density distances skipped: ") +
                           e.what());
  }
  return rep;
}

}  // namespace tcoh
