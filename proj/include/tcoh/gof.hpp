#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tcoh {

// Type-7 quantile (linear interpolation of order statistics) of an ascending
// sorted sample; q in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double q);

// Exact two-sided Kolmogorov-Smirnov distance between the sample ECDF and the
// coherence limit law: max over order statistics of the one-sided gaps.
double ecdf_ks_limit(std::vector<double> samples);

// Gaussian kernel density estimate on an equally spaced grid spanning
// [min - 3h, max + 3h]. Default bandwidth h = 0.9 * min(sd, IQR/1.34) *
// R^{-1/5} (sd falls back in when the IQR is zero); a positive
// bandwidth_override replaces the rule. Throws if fewer than two samples or
// if the bandwidth degenerates to zero.
struct KdeEstimate {
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};
KdeEstimate gaussian_kde(const std::vector<double>& samples,
                         std::int64_t grid_points = 4096,
                         double bandwidth_override = 0.0);

// Density distances between a tabulated estimate and the limit density,
// trapezoid-integrated over the estimate's grid extended (at the same
// spacing, estimate = 0 there) to cover the central 1 - 2e-5 mass of the
// limit law:
//   d_l2 = integral (fhat - f)^2,   d_tv = 0.5 * integral |fhat - f|.
struct DensityDistances {
  double d_l2 = 0.0;
  double d_tv = 0.0;
  double kde_mass = 0.0;    // trapezoid mass of the estimate over its grid
  double limit_mass = 0.0;  // limit-law mass inside the integration domain
};
DensityDistances density_distances(const KdeEstimate& kde);

// Full comparison of a Monte Carlo sample against the limit law. d_l2/d_tv
// are NaN (with a warning) when the density estimate is not available.
struct GofReport {
  std::int64_t count = 0;
  double d_ks = 0.0;
  double d_l2 = 0.0;
  double d_tv = 0.0;
  double bandwidth = 0.0;
  double sample_mean = 0.0;
  double sample_median = 0.0;
  double limit_mean_value = 0.0;
  double limit_median_value = 0.0;
  std::vector<std::string> warnings;
};
GofReport gof_against_limit(const std::vector<double>& samples,
                            std::int64_t grid_points = 4096,
                            double bandwidth_override = 0.0);

}  // namespace tcoh
