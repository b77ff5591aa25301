#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tcoh {

// Banded-model parameters: a central band of half-width tau where
// correlations are unconstrained, a transition band of width K where they
// equal eps_n, and zero correlation beyond tau+K.
struct ModelParams {
  std::int64_t n = 0;    // sample size (rows)
  std::int64_t p = 0;    // dimension (columns)
  std::int64_t tau = 1;  // central bandwidth
  std::int64_t K = 0;    // transition bandwidth
  double eps_n = 0.0;    // transition correlation

  // Throws std::invalid_argument naming the first violated constraint:
  // n >= 2, p >= 2, tau >= 1, K >= 0, |eps_n| < 1, tau + K < p.
  // Deliberately not enforced at construction: derive_schedule() can emit
  // parameter sets with tau + K >= p for small n, and those must be
  // representable so diagnostics can report on them. Every consumer that
  // actually samples or scans calls validate() first.
  void validate() const;
};

// Rate parameters of the asymptotic regime: eps_n ~ gamma*sqrt(ln p / n),
// model correlations capped via delta, K = O(p^nu), tau = o(p^t).
struct RateParams {
  double gamma = 0.0;
  double delta = 0.5;  // in (0,1)
  double nu = 0.01;    // > 0
  double t = 0.1;      // > 0; the "for any t>0" condition checked at one t

  void validate() const;
};

struct RateConstants {
  double c_gamma;        // 0.5*gamma^2 - 2|gamma| + 2
  double c_gamma_delta;  // min( (0.5*gamma^2 - 2|gamma| + 1)/3, delta^2(2-delta)^2/36 )
};

enum class HypStatus { pass, fail, trend, not_evaluated };

const char* to_string(HypStatus s);

struct HypothesisEntry {
  std::string name;
  HypStatus status = HypStatus::not_evaluated;
  // For trend entries: the diagnostic ratio at each grid point and whether the
  // ratios decrease across the grid (strictly for Hyp 1/2/5; weakly for the
  // Hyp 3 cardinality ratio, where identically zero is a legitimate pass).
  std::vector<double> diagnostics;
  bool trend_decreasing = false;
  std::string detail;
};

// Exactly five entries, Hyp 1..5 in order.
struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  const HypothesisEntry& hyp(int number) const { return entries.at(number - 1); }
};

// Parameter schedule: p = floor(exp(n^{1/3.5})), tau = 5*floor(ln p),
// K = 10*floor(n^{1/10} * ln p), eps_n = 0.1*sqrt(ln p / n). Natural logs.
// Rejects n < 2. Note: for n below roughly 180 the schedule gives
// tau + K >= p; see ModelParams::validate().
ModelParams derive_schedule(std::int64_t n);

// c_gamma = 0.5*gamma^2 - 2|gamma| + 2 and
// c(gamma,delta) = min( (0.5*gamma^2 - 2|gamma| + 1)/3, delta^2*(2-delta)^2/36 ).
// Rejects delta outside (0,1).
RateConstants rate_constants(double gamma, double delta);

// Per-column correlation accessor for a given grid point, used to evaluate
// the Hyp 3 cardinality |Gamma_{p,delta}|; returns the accessor for the model
// at `params` (1-based column indices, symmetric, unit diagonal).
using CorrFactory =
    std::function<std::function<double(std::int64_t, std::int64_t)>(const ModelParams&)>;

// Finite-n rendering of the five hypotheses over an increasing n-grid
// (length >= 3). Hard checks: gamma in (-2+sqrt(2), 2-sqrt(2)) for Hyp 4 and
// 0 < nu < c(gamma,delta) for Hyp 5. Trend diagnostics: ln p / n^{1/3}
// (Hyp 1), tau / p^t (Hyp 2), K / p^nu (Hyp 5), |Gamma|/p (Hyp 3, only when a
// correlation factory is supplied, else not-evaluated).
// Rejects gamma outside (-2,2) and grids that are too short or not increasing.
HypothesisReport check_hypotheses(
    const std::function<ModelParams(std::int64_t)>& schedule,
    const RateParams& rates, const std::vector<std::int64_t>& n_grid,
    const CorrFactory& corr_factory = nullptr);

}  // namespace tcoh
