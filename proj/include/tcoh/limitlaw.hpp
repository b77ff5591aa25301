#pragma once

#include <cstdint>

namespace tcoh {

// Limit distribution of the normalized tau-coherence statistic
// T_n = n L^2 - 4 ln p + ln ln p: a Gumbel law with cdf
// F(y) = exp(-(1/sqrt(8 pi)) e^{-y/2}), i.e. location -ln(8 pi), scale 2.

inline constexpr double kLimitScale = 2.0;
double limit_location();  // -ln(8 pi)
double limit_mean();      // -ln(8 pi) + 2*EulerGamma

double limit_cdf(double y);
double limit_pdf(double y);
// Closed form -2*ln(sqrt(8 pi) * ln(1/q)); rejects q outside (0,1).
double limit_quantile(double q);

// T = n*l^2 - 4 ln p + ln ln p. Rejects p < 3 (ln ln p) and l < 0.
double normalize_statistic(double l, std::int64_t n, std::int64_t p);

// a_n(y) = sqrt(4 n ln p - n ln ln p + n y); the raw-inner-product threshold
// equivalent to the normalized level y. Monotone increasing in y. Rejects
// p < 3 and a negative radicand (the message reports the offending y).
double threshold_a_n(std::int64_t n, std::int64_t p, double y);

// Leading term of the off-band exceedance probability
// P(|tX^k X^j| > a_n(y)) for independent columns:
// (1/sqrt(2 pi)) e^{-y/2} p^{-2}.
double asymptotic_tail_p0(std::int64_t n, std::int64_t p, double y);

// Supremum c_gamma of valid decay exponents d in the transition-band tail
// bound P_K = o(p^{-d}): c_gamma = 0.5*gamma^2 - 2|gamma| + 2.
// Rejects |gamma| >= 2.
double pk_decay_exponent(double gamma);

// Inverse-transform draw from the limit law at (seed, stream, index); used by
// the Monte-Carlo goodness-of-fit checks.
double limit_sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace tcoh
