#include "tcoh/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tcoh/indexsets.hpp"

namespace tcoh {

void ModelParams::validate() const {
  if (n < 2) throw std::invalid_argument("ModelParams: n >= 2 required");
  if (p < 2) throw std::invalid_argument("ModelParams: p >= 2 required");
  if (tau < 1) throw std::invalid_argument("ModelParams: tau >= 1 required");
  if (K < 0) throw std::invalid_argument("ModelParams: K >= 0 required");
  if (!(std::abs(eps_n) < 1.0))
    throw std::invalid_argument("ModelParams: |eps_n| < 1 required");
  if (tau + K >= p) {
    std::ostringstream msg;
    msg << "ModelParams: tau + K < p required (tau=" << tau << ", K=" << K
        << ", p=" << p << "); the off-band index set would be empty";
    throw std::invalid_argument(msg.str());
  }
}

void RateParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("RateParams: delta in (0,1) required");
  if (!(nu > 0.0)) throw std::invalid_argument("RateParams: nu > 0 required");
  if (!(t > 0.0)) throw std::invalid_argument("RateParams: t > 0 required");
}

const char* to_string(HypStatus s) {
  switch (s) {
    case HypStatus::pass: return "pass";
    case HypStatus::fail: return "fail";
    case HypStatus::trend: return "asymptotic-trend";
    case HypStatus::not_evaluated: return "not-evaluated";
  }
  return "?";
}

ModelParams derive_schedule(std::int64_t n) {
  if (n < 2) throw std::invalid_argument("derive_schedule: n >= 2 required");
  const double nd = static_cast<double>(n);
  const double p_real = std::exp(std::exp(std::log(nd) / 3.5));
  ModelParams params;
  params.n = n;
  params.p = static_cast<std::int64_t>(std::floor(p_real));
  const double ln_p = std::log(static_cast<double>(params.p));
  params.tau = 5 * static_cast<std::int64_t>(std::floor(ln_p));
  params.K =
      10 * static_cast<std::int64_t>(std::floor(std::pow(nd, 0.1) * ln_p));
  params.eps_n = 0.1 * std::sqrt(ln_p / nd);
  return params;
}

RateConstants rate_constants(double gamma, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("rate_constants: delta in (0,1) required");
  const double ag = std::abs(gamma);
  RateConstants rc;
  rc.c_gamma = 0.5 * gamma * gamma - 2.0 * ag + 2.0;
  const double gamma_branch = (0.5 * gamma * gamma - 2.0 * ag + 1.0) / 3.0;
  const double delta_branch = delta * delta * (2.0 - delta) * (2.0 - delta) / 36.0;
  rc.c_gamma_delta = std::min(gamma_branch, delta_branch);
  return rc;
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool weakly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

}  // namespace

HypothesisReport check_hypotheses(
    const std::function<ModelParams(std::int64_t)>& schedule,
    const RateParams& rates, const std::vector<std::int64_t>& n_grid,
    const CorrFactory& corr_factory) {
  rates.validate();
  if (n_grid.size() < 3)
    throw std::invalid_argument("check_hypotheses: grid of length >= 3 required");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("check_hypotheses: grid must be strictly increasing");
  if (!(std::abs(rates.gamma) < 2.0))
    throw std::invalid_argument("check_hypotheses: gamma in (-2,2) required");

  std::vector<ModelParams> grid_params;
  grid_params.reserve(n_grid.size());
  for (std::int64_t n : n_grid) grid_params.push_back(schedule(n));

  HypothesisReport report;
  report.entries.resize(5);

  // Hyp 1: ln p = o(n^{1/3}), diagnosed by the ratio ln p / n^{1/3}.
  {
    HypothesisEntry& e = report.entries[0];
    e.name = "Hyp1: ln p = o(n^(1/3))";
    for (const ModelParams& mp : grid_params)
      e.diagnostics.push_back(std::log(static_cast<double>(mp.p)) /
                              std::cbrt(static_cast<double>(mp.n)));
    e.trend_decreasing = strictly_decreasing(e.diagnostics);
    e.status = HypStatus::trend;
    e.detail = e.trend_decreasing ? "ratio decreasing across grid"
                                  : "ratio NOT decreasing across grid";
  }

  // Hyp 2: tau = o(p^t) at the configured t, diagnosed by tau / p^t.
  {
    HypothesisEntry& e = report.entries[1];
    e.name = "Hyp2: tau = o(p^t)";
    for (const ModelParams& mp : grid_params)
      e.diagnostics.push_back(static_cast<double>(mp.tau) /
                              std::pow(static_cast<double>(mp.p), rates.t));
    e.trend_decreasing = strictly_decreasing(e.diagnostics);
    e.status = HypStatus::trend;
    e.detail = "t = " + std::to_string(rates.t) +
               (e.trend_decreasing ? "; ratio decreasing" : "; ratio NOT decreasing");
  }

  // Hyp 3: |Gamma_{p,delta}| = o(p); needs a model correlation accessor.
  {
    HypothesisEntry& e = report.entries[2];
    e.name = "Hyp3: |Gamma_{p,delta}| = o(p)";
    if (corr_factory) {
      for (const ModelParams& mp : grid_params) {
        auto corr = corr_factory(mp);
        GammaSets gs = gamma_set(corr, mp.p, rates.delta);
        e.diagnostics.push_back(static_cast<double>(gs.gamma.size()) /
                                static_cast<double>(mp.p));
      }
      e.trend_decreasing = weakly_decreasing(e.diagnostics);
      e.status = HypStatus::trend;
      e.detail = e.trend_decreasing ? "|Gamma|/p non-increasing"
                                    : "|Gamma|/p increasing";
    } else {
      e.status = HypStatus::not_evaluated;
      e.detail = "no correlation accessor supplied";
    }
  }

  // Hyp 4: eps_n ~ gamma*sqrt(ln p/n) with gamma in (-2+sqrt 2, 2-sqrt 2);
  // hard interval check.
  {
    HypothesisEntry& e = report.entries[3];
    e.name = "Hyp4: gamma in (-2+sqrt2, 2-sqrt2)";
    const double lo = -2.0 + std::sqrt(2.0);
    const double hi = 2.0 - std::sqrt(2.0);
    const bool ok = rates.gamma > lo && rates.gamma < hi;
    e.status = ok ? HypStatus::pass : HypStatus::fail;
    e.diagnostics = {rates.gamma, lo, hi};
    e.detail = "gamma = " + std::to_string(rates.gamma);
  }

  // Hyp 5: K = O(p^nu) with 0 < nu < c(gamma,delta): the exponent bound is a
  // hard check; the finite-n growth is diagnosed by K / p^nu.
  {
    HypothesisEntry& e = report.entries[4];
    e.name = "Hyp5: K = O(p^nu), nu < c(gamma,delta)";
    const RateConstants rc = rate_constants(rates.gamma, rates.delta);
    if (!(rates.nu < rc.c_gamma_delta)) {
      e.status = HypStatus::fail;
      e.detail = "nu = " + std::to_string(rates.nu) +
                 " >= c(gamma,delta) = " + std::to_string(rc.c_gamma_delta) +
                 " (strict inequality required)";
    } else {
      for (const ModelParams& mp : grid_params)
        e.diagnostics.push_back(static_cast<double>(mp.K) /
                                std::pow(static_cast<double>(mp.p), rates.nu));
      e.trend_decreasing = strictly_decreasing(e.diagnostics);
      e.status = HypStatus::trend;
      e.detail = "nu = " + std::to_string(rates.nu) + " < c(gamma,delta) = " +
                 std::to_string(rc.c_gamma_delta) +
                 (e.trend_decreasing ? "; ratio decreasing" : "; ratio NOT decreasing");
    }
  }

  return report;
}

}  // namespace tcoh
