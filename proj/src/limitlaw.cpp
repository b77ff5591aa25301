#include "tcoh/limitlaw.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tcoh/rng.hpp"

namespace tcoh {

namespace {

const double kInvSqrt8Pi = 1.0 / std::sqrt(8.0 * std::numbers::pi);

}  // namespace

double limit_location() { return -std::log(8.0 * std::numbers::pi); }

double limit_mean() {
  return limit_location() + kLimitScale * std::numbers::egamma;
}

double limit_cdf(double y) {
  return std::exp(-kInvSqrt8Pi * std::exp(-0.5 * y));
}

double limit_pdf(double y) {
  const double e = std::exp(-0.5 * y);
  return 0.5 * kInvSqrt8Pi * e * std::exp(-kInvSqrt8Pi * e);
}

double limit_quantile(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("limit_quantile: q in (0,1) required");
  return -2.0 * std::log(std::sqrt(8.0 * std::numbers::pi) * std::log(1.0 / q));
}

double normalize_statistic(double l, std::int64_t n, std::int64_t p) {
  if (p < 3) throw std::invalid_argument("normalize_statistic: p >= 3 required");
  if (l < 0.0) throw std::invalid_argument("normalize_statistic: l >= 0 required");
  const double ln_p = std::log(static_cast<double>(p));
  return static_cast<double>(n) * l * l - 4.0 * ln_p + std::log(ln_p);
}

double threshold_a_n(std::int64_t n, std::int64_t p, double y) {
  if (p < 3) throw std::invalid_argument("threshold_a_n: p >= 3 required");
  if (n < 1) throw std::invalid_argument("threshold_a_n: n >= 1 required");
  const double nd = static_cast<double>(n);
  const double ln_p = std::log(static_cast<double>(p));
  const double radicand = 4.0 * nd * ln_p - nd * std::log(ln_p) + nd * y;
  if (radicand < 0.0) {
    std::ostringstream msg;
    msg << "threshold_a_n: negative radicand at y = " << y;
    throw std::invalid_argument(msg.str());
  }
  return std::sqrt(radicand);
}

double asymptotic_tail_p0(std::int64_t n, std::int64_t p, double y) {
  (void)n;  // the leading term depends on n only through the threshold
  if (p < 3) throw std::invalid_argument("asymptotic_tail_p0: p >= 3 required");
  const double pd = static_cast<double>(p);
  return std::exp(-0.5 * y) / (std::sqrt(2.0 * std::numbers::pi) * pd * pd);
}

double pk_decay_exponent(double gamma) {
  if (!(std::abs(gamma) < 2.0))
    throw std::invalid_argument("pk_decay_exponent: |gamma| < 2 required");
  const double ag = std::abs(gamma);
  return 0.5 * gamma * gamma - 2.0 * ag + 2.0;
}

double limit_sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return limit_quantile(rng::uniform01(seed, stream, index));
}

}  // namespace tcoh
