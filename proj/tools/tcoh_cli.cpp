#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcoh/coherence.hpp"
#include "tcoh/gof.hpp"
#include "tcoh/indexsets.hpp"
#include "tcoh/io.hpp"
#include "tcoh/limitlaw.hpp"
#include "tcoh/model.hpp"
#include "tcoh/rng.hpp"
#include "tcoh/sampler.hpp"
#include "tcoh/study.hpp"
#include "tcoh/version.hpp"

namespace {

using nlohmann::json;

// Flag-consistency problems detected after parsing; reported as usage errors
// (exit 1), unlike computation failures (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit(const json& j, bool as_json) {
  if (as_json) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& [key, value] : j.items()) {
    if (value.is_number_float())
      std::cout << key << ": " << fmt17(value.get<double>()) << "\n";
    else
      std::cout << key << ": " << value.dump() << "\n";
  }
}

struct GenOpts {
  std::int64_t n = 0, p = 0, tau = 0, K = -1;
  double eps = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::int64_t block_cols = 1024;
  std::string out;
  bool has_p = false, has_tau = false, has_K = false, has_eps = false;
  bool normalize = false;
  bool json_out = false;
};

int run_gen(const GenOpts& o) {
  tcoh::ModelParams params = tcoh::derive_schedule(o.n);
  if (o.has_p) params.p = o.p;
  if (o.has_tau) params.tau = o.tau;
  if (o.has_K) params.K = o.K;
  if (o.has_eps) params.eps_n = o.eps;
  params.validate();
  omp_set_num_threads(tcoh::resolve_threads(o.threads));

  const tcoh::CoefficientWindow window = tcoh::build_window(
      params.tau, params.K, params.eps_n, o.seed, o.normalize);
  const tcoh::MaSampler source(params, window, o.seed);
  tcoh::io::write_tcoh_stream(o.out, source, o.block_cols);

  json meta;
  meta["format"] = "TCOH";
  meta["format_version"] = tcoh::io::kFormatVersion;
  meta["tool_version"] = tcoh::kVersion;
  meta["n"] = params.n;
  meta["p"] = params.p;
  meta["tau"] = params.tau;
  meta["K"] = params.K;
  meta["eps_n"] = params.eps_n;
  meta["seed"] = o.seed;
  meta["normalized"] = o.normalize;
  meta["window_r"] = window.r;
  {
    std::ofstream side(o.out + ".meta.json", std::ios::binary);
    if (!side)
      throw std::runtime_error("cannot write sidecar '" + o.out +
                               ".meta.json'");
    side << meta.dump(2) << "\n";
  }

  json rep;
  rep["out"] = o.out;
  rep["n"] = params.n;
  rep["p"] = params.p;
  rep["tau"] = params.tau;
  rep["K"] = params.K;
  rep["eps_n"] = params.eps_n;
  rep["seed"] = o.seed;
  rep["bytes"] = tcoh::io::kHeaderBytes + params.n * params.p * 8;
  emit(rep, o.json_out);
  return 0;
}

struct CoherenceOpts {
  std::string in, mode = "centered", stat = "corr", mu_path;
  std::int64_t tau = 0;
  std::int64_t block_size = 0;
  std::uint64_t memory_budget = 1ull << 30;
  int threads = 0;
  bool json_out = false;
};

int run_coherence(const CoherenceOpts& o) {
  if (o.mode == "known-mean" && o.mu_path.empty())
    throw UsageError("--mode known-mean requires --mu");
  const tcoh::io::TcohFileSource source(o.in);
  tcoh::ScanConfig cfg;
  cfg.tau = o.tau;
  cfg.block_size = o.block_size;
  cfg.memory_budget = o.memory_budget;
  cfg.threads = o.threads;
  cfg.mode = o.mode == "known-mean" ? tcoh::MeanMode::known
                                    : tcoh::MeanMode::centered;
  if (cfg.mode == tcoh::MeanMode::known)
    cfg.mu = tcoh::io::read_mu_json(o.mu_path, source.cols());

  const tcoh::CoherenceResult res =
      o.stat == "raw" ? tcoh::v_statistic_result(source, cfg)
                      : tcoh::tau_coherence_blockwise(source, cfg);

  json rep;
  rep["stat"] = o.stat;
  if (o.stat == "raw")
    rep["v_n_tau"] = *res.v_n_tau;
  else
    rep["l_n_tau"] = res.l_n_tau;
  rep["pair"] = {res.argmax_k, res.argmax_j};
  rep["n"] = source.rows();
  rep["p"] = source.cols();
  rep["tau"] = o.tau;
  rep["mode"] = o.mode;
  rep["block_size"] = res.block_size;
  rep["pairs_scanned"] = res.pairs_scanned;
  rep["seconds"] = res.seconds;
  rep["threads"] = res.threads;
  rep["version"] = tcoh::kVersion;
  emit(rep, o.json_out);
  return 0;
}

struct McOpts {
  std::vector<std::int64_t> ns;
  std::int64_t reps = 200;
  std::uint64_t seed = 0;
  bool redraw_window = false;
  std::int64_t p = 0, tau = 0, K = -1;
  double eps = 0.0;
  bool has_p = false, has_tau = false, has_K = false, has_eps = false;
  int threads = 0;
  std::int64_t block_size = 0;
  std::uint64_t memory_budget = 1ull << 30;
  std::int64_t scan_tau = 0;
  std::string out;
  bool json_out = false;
};

int run_mc(const McOpts& o) {
  namespace fs = std::filesystem;
  const bool file_mode = o.out.size() > 4 &&
                         o.out.compare(o.out.size() - 4, 4, ".csv") == 0;
  if (file_mode && o.ns.size() != 1)
    throw UsageError("--out <file>.csv needs exactly one --n value");
  if (!file_mode) fs::create_directories(o.out);

  json runs = json::array();
  for (const std::int64_t n : o.ns) {
    tcoh::StudyConfig cfg;
    cfg.params = tcoh::derive_schedule(n);
    if (o.has_p) cfg.params.p = o.p;
    if (o.has_tau) cfg.params.tau = o.tau;
    if (o.has_K) cfg.params.K = o.K;
    if (o.has_eps) cfg.params.eps_n = o.eps;
    cfg.replications = o.reps;
    // one independent study per n: the effective seed folds n into the
    // user-supplied seed (recorded in the CSV metadata)
    cfg.master_seed =
        tcoh::rng::splitmix64(o.seed ^ static_cast<std::uint64_t>(n));
    cfg.redraw_window = o.redraw_window;
    cfg.threads = o.threads;
    cfg.block_size = o.block_size;
    cfg.memory_budget = o.memory_budget;
    cfg.scan_tau = o.scan_tau;

    const tcoh::McSampleSet samples = tcoh::run_study(cfg);
    const std::string path =
        file_mode ? o.out
                  : (fs::path(o.out) / ("samples_n" + std::to_string(n) + ".csv"))
                        .string();
    tcoh::write_samples_csv(path, samples);  // failures land in the metadata

    if (!samples.failures.empty()) {
      std::cerr << "warning: " << samples.failures.size() << " of " << o.reps
                << " replications failed at n = " << n << "; first: "
                << samples.failures.front().message << "\n";
      if (samples.t.empty())
        throw std::runtime_error("mc: every replication failed at n = " +
                                 std::to_string(n) + "; first error: " +
                                 samples.failures.front().message);
    }

    std::vector<double> sorted(samples.t);
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (const double v : sorted) mean += v;
    mean /= static_cast<double>(sorted.size());

    json entry;
    entry["n"] = n;
    entry["p"] = cfg.params.p;
    entry["tau"] = cfg.params.tau;
    entry["K"] = cfg.params.K;
    entry["eps_n"] = cfg.params.eps_n;
    entry["scan_tau"] = samples.scan_tau;
    entry["replications"] = o.reps;
    entry["failed"] = samples.failures.size();
    entry["master_seed"] = cfg.master_seed;
    entry["path"] = path;
    entry["t_mean"] = mean;
    entry["t_median"] = tcoh::quantile_sorted(sorted, 0.5);
    runs.push_back(entry);
  }
  json rep;
  rep["seed"] = o.seed;
  rep["runs"] = runs;
  if (o.json_out) {
    std::cout << rep.dump(2) << "\n";
  } else {
    for (const auto& entry : runs)
      std::cout << "n=" << entry["n"] << " p=" << entry["p"]
                << " reps=" << entry["replications"]
                << " t_median=" << fmt17(entry["t_median"].get<double>())
                << " -> " << entry["path"].get<std::string>() << "\n";
  }
  return 0;
}

struct GofOpts {
  std::string samples, out;
  std::int64_t grid_points = 4096;
  double bandwidth = 0.0;
  bool json_out = false;
};

int run_gof(const GofOpts& o) {
  const tcoh::McSampleSet samples = tcoh::read_samples_csv(o.samples);
  const tcoh::GofReport g =
      tcoh::gof_against_limit(samples.t, o.grid_points, o.bandwidth);

  json rep;
  rep["samples"] = o.samples;
  rep["n"] = samples.params.n;
  rep["p"] = samples.params.p;
  rep["count"] = g.count;
  rep["d_ks"] = g.d_ks;
  rep["d_l2"] = g.d_l2;
  rep["d_tv"] = g.d_tv;
  rep["bandwidth"] = g.bandwidth;
  rep["sample_mean"] = g.sample_mean;
  rep["sample_median"] = g.sample_median;
  rep["limit_mean"] = g.limit_mean_value;
  rep["limit_median"] = g.limit_median_value;
  rep["warnings"] = g.warnings;
  rep["version"] = tcoh::kVersion;
  if (!o.out.empty()) {
    std::ofstream outf(o.out, std::ios::binary);
    if (!outf) throw std::runtime_error("cannot write report '" + o.out + "'");
    outf << rep.dump(2) << "\n";
  }
  emit(rep, o.json_out);
  return 0;
}

struct CheckOpts {
  double gamma = 0.0, delta = 0.0, nu = 0.01, t = 0.1;
  std::vector<std::int64_t> n_grid = {500, 1000, 2000};
  bool json_out = false;
};

int run_check(const CheckOpts& o) {
  tcoh::RateParams rates;
  rates.gamma = o.gamma;
  rates.delta = o.delta;
  rates.nu = o.nu;
  rates.t = o.t;
  const tcoh::HypothesisReport report = tcoh::check_hypotheses(
      [](std::int64_t n) { return tcoh::derive_schedule(n); }, rates, o.n_grid);

  json entries = json::array();
  for (const auto& e : report.entries) {
    json je;
    je["name"] = e.name;
    je["status"] = tcoh::to_string(e.status);
    je["diagnostics"] = e.diagnostics;
    je["trend_decreasing"] = e.trend_decreasing;
    je["detail"] = e.detail;
    entries.push_back(je);
  }
  json rep;
  rep["gamma"] = o.gamma;
  rep["delta"] = o.delta;
  rep["nu"] = o.nu;
  rep["t"] = o.t;
  rep["n_grid"] = o.n_grid;
  rep["hypotheses"] = entries;
  if (o.json_out) {
    std::cout << rep.dump(2) << "\n";
  } else {
    for (const auto& e : report.entries) {
      std::cout << e.name << ": " << tcoh::to_string(e.status);
      if (!e.detail.empty()) std::cout << " (" << e.detail << ")";
      std::cout << "\n";
      if (!e.diagnostics.empty()) {
        std::cout << "  ratios:";
        for (const double d : e.diagnostics) std::cout << " " << fmt17(d);
        std::cout << "\n";
      }
    }
  }
  return 0;
}

struct CardOpts {
  std::int64_t p = 0, tau = 0, K = 0;
  bool brute = false;
  bool json_out = false;
};

int run_card(const CardOpts& o) {
  const tcoh::SetCardinalities formula = tcoh::cardinalities(o.p, o.tau, o.K);
  json rep;
  rep["p"] = o.p;
  rep["tau"] = o.tau;
  rep["K"] = o.K;
  rep["formula"] = {{"i_tau", formula.i_tau},
                    {"i_k", formula.i_k},
                    {"i_zero", formula.i_zero},
                    {"total", formula.total}};
  bool match = true;
  tcoh::SetCardinalities brute{};
  if (o.brute) {
    for (std::int64_t k = 1; k < o.p; ++k)
      for (std::int64_t j = k + 1; j <= o.p; ++j) {
        switch (tcoh::classify_pair(k, j, o.tau, o.K)) {
          case tcoh::PairRegion::band: ++brute.i_tau; break;
          case tcoh::PairRegion::transition: ++brute.i_k; break;
          case tcoh::PairRegion::outer: ++brute.i_zero; break;
        }
        ++brute.total;
      }
    match = brute.i_tau == formula.i_tau && brute.i_k == formula.i_k &&
            brute.i_zero == formula.i_zero && brute.total == formula.total;
    rep["brute"] = {{"i_tau", brute.i_tau},
                    {"i_k", brute.i_k},
                    {"i_zero", brute.i_zero},
                    {"total", brute.total}};
    rep["match"] = match;
  }
  if (o.json_out) {
    std::cout << rep.dump(2) << "\n";
  } else {
    std::cout << "formula: |I_tau|=" << formula.i_tau << " |I_K|=" << formula.i_k
              << " |I_0|=" << formula.i_zero << " total=" << formula.total
              << "\n";
    if (o.brute) {
      std::cout << "brute:   |I_tau|=" << brute.i_tau << " |I_K|=" << brute.i_k
                << " |I_0|=" << brute.i_zero << " total=" << brute.total << "\n"
                << (match ? "match" : "MISMATCH") << "\n";
    }
  }
  if (o.brute && !match)
    throw std::runtime_error("closed-form and brute-force counts disagree");
  return 0;
}

struct TailOpts {
  std::int64_t n = 0, p = 0;
  double y = 0.0, rho = 0.0;
  std::int64_t reps = 1000000;
  std::uint64_t seed = 0;
  int threads = 0;
  bool json_out = false;
};

int run_tailprob(const TailOpts& o) {
  const tcoh::TailProbResult res = tcoh::estimate_tail_probability(
      o.n, o.p, o.y, o.rho, o.reps, o.seed, o.threads);
  json rep;
  rep["n"] = o.n;
  rep["p"] = o.p;
  rep["y"] = o.y;
  rep["rho"] = o.rho;
  rep["replications"] = res.replications;
  rep["seed"] = o.seed;
  rep["hits"] = res.hits;
  rep["threshold"] = res.threshold;
  rep["p_hat"] = res.p_hat;
  rep["half_width"] = res.half_width;
  rep["p0"] = res.p0;
  rep["ratio"] = res.ratio;
  emit(rep, o.json_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tau-coherence of Gaussian observation matrices: generation, "
               "blockwise computation, Monte Carlo studies, limit-law checks"};
  app.set_version_flag("--version", tcoh::kVersion);
  app.require_subcommand(1);

  GenOpts gen;
  auto* cgen = app.add_subcommand(
      "gen", "Generate a moving-average observation matrix (TCOH file)");
  cgen->add_option("--n", gen.n, "sample size (rows)")->required();
  auto* gp = cgen->add_option("--p", gen.p, "dimension (default: schedule p(n))");
  auto* gt = cgen->add_option("--tau", gen.tau, "central bandwidth (default: schedule)");
  auto* gk = cgen->add_option("--K", gen.K, "transition bandwidth (default: schedule)");
  auto* ge = cgen->add_option("--eps", gen.eps, "transition correlation (default: schedule)");
  cgen->add_option("--seed", gen.seed, "generator seed");
  cgen->add_flag("--normalize", gen.normalize,
                 "scale the window so columns have unit variance");
  cgen->add_option("--threads", gen.threads, "worker threads (0: TCOH_THREADS or all)");
  cgen->add_option("--block-cols", gen.block_cols, "columns per write block")
      ->check(CLI::PositiveNumber);
  cgen->add_option("--out", gen.out, "output .tcoh path")->required();
  cgen->add_flag("--json", gen.json_out, "machine-readable output");

  CoherenceOpts coh;
  auto* ccoh = app.add_subcommand(
      "coherence", "Compute the tau-coherence of a TCOH matrix blockwise");
  ccoh->add_option("--in", coh.in, "input .tcoh path")->required();
  ccoh->add_option("--tau", coh.tau, "minimum index distance")->required();
  ccoh->add_option("--block-size", coh.block_size,
                   "columns per packet (0: from memory budget)");
  ccoh->add_option("--memory-budget", coh.memory_budget,
                   "packet memory budget (accepts suffixes, e.g. 512MiB)")
      ->transform(CLI::AsSizeValue(false));
  ccoh->add_option("--mode", coh.mode, "centering mode")
      ->check(CLI::IsMember({"centered", "known-mean"}));
  ccoh->add_option("--mu", coh.mu_path, "known column means (JSON), for known-mean mode");
  ccoh->add_option("--stat", coh.stat, "corr: tau-coherence; raw: max |t(X^k)X^j|")
      ->check(CLI::IsMember({"corr", "raw"}));
  ccoh->add_option("--threads", coh.threads, "worker threads (0: TCOH_THREADS or all)");
  ccoh->add_flag("--json", coh.json_out, "machine-readable output");

  McOpts mc;
  auto* cmc = app.add_subcommand(
      "mc", "Monte Carlo study of the normalized coherence statistic");
  cmc->add_option("--n", mc.ns, "sample sizes (comma-separated)")
      ->required()
      ->delimiter(',');
  cmc->add_option("--reps", mc.reps, "replications per n")->check(CLI::PositiveNumber);
  cmc->add_option("--seed", mc.seed, "study seed (per-n seed derives from it)");
  cmc->add_flag("--redraw-window", mc.redraw_window,
                "draw window coefficients per replication instead of once");
  auto* mp = cmc->add_option("--p", mc.p, "override schedule p");
  auto* mt = cmc->add_option("--tau", mc.tau, "override schedule tau");
  auto* mk = cmc->add_option("--K", mc.K, "override schedule K");
  auto* me = cmc->add_option("--eps", mc.eps, "override schedule eps_n");
  cmc->add_option("--threads", mc.threads, "replication-level threads");
  cmc->add_option("--block-size", mc.block_size, "scan block size (0: auto)");
  cmc->add_option("--memory-budget", mc.memory_budget,
                  "scan memory budget per replication")
      ->transform(CLI::AsSizeValue(false));
  cmc->add_option("--scan-tau", mc.scan_tau,
                  "pair distance scanned (0: window-induced band 2*tau+1)");
  cmc->add_option("--out", mc.out, "output directory (or <file>.csv for one n)")
      ->required();
  cmc->add_flag("--json", mc.json_out, "machine-readable output");

  GofOpts gof;
  auto* cgof = app.add_subcommand(
      "gof", "Goodness of fit of a sample file against the limit law");
  cgof->add_option("--samples", gof.samples, "sample CSV from mc")->required();
  cgof->add_option("--out", gof.out, "write the JSON report here");
  cgof->add_option("--grid-points", gof.grid_points, "density grid resolution")
      ->check(CLI::Range(static_cast<std::int64_t>(2),
                         static_cast<std::int64_t>(1 << 22)));
  cgof->add_option("--bandwidth", gof.bandwidth,
                   "kernel bandwidth override (0: plug-in rule)");
  cgof->add_flag("--json", gof.json_out, "machine-readable output");

  CheckOpts check;
  auto* ccheck = app.add_subcommand(
      "check", "Check the limit theorem's rate hypotheses on an n-grid");
  ccheck->add_option("--gamma", check.gamma, "transition rate constant gamma")
      ->required();
  ccheck->add_option("--delta", check.delta, "near-unity correlation margin delta")
      ->required();
  ccheck->add_option("--nu", check.nu, "K growth exponent nu");
  ccheck->add_option("--t", check.t, "tau growth exponent t");
  ccheck->add_option("--n-grid", check.n_grid, "grid of sample sizes")
      ->delimiter(',');
  ccheck->add_flag("--json", check.json_out, "machine-readable output");

  CardOpts card;
  auto* ccard = app.add_subcommand(
      "card", "Cardinalities of the index-pair regions I_tau, I_K, I_0");
  ccard->add_option("--p", card.p, "dimension")->required();
  ccard->add_option("--tau", card.tau, "central bandwidth")->required();
  ccard->add_option("--K", card.K, "transition bandwidth")->required();
  ccard->add_flag("--brute", card.brute, "also count by brute-force enumeration");
  ccard->add_flag("--json", card.json_out, "machine-readable output");

  TailOpts tail;
  auto* ctail = app.add_subcommand(
      "tailprob", "Monte Carlo check of the pairwise tail probability");
  ctail->add_option("--n", tail.n, "sample size")->required();
  ctail->add_option("--p", tail.p, "dimension (sets the threshold a_n)")->required();
  ctail->add_option("--y", tail.y, "threshold offset y");
  ctail->add_option("--rho", tail.rho, "pairwise correlation")
      ->check(CLI::Range(-1.0, 1.0));
  ctail->add_option("--reps", tail.reps, "Monte Carlo replications")
      ->check(CLI::PositiveNumber);
  ctail->add_option("--seed", tail.seed, "generator seed");
  ctail->add_option("--threads", tail.threads, "worker threads");
  ctail->add_flag("--json", tail.json_out, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  gen.has_p = gp->count() > 0;
  gen.has_tau = gt->count() > 0;
  gen.has_K = gk->count() > 0;
  gen.has_eps = ge->count() > 0;
  mc.has_p = mp->count() > 0;
  mc.has_tau = mt->count() > 0;
  mc.has_K = mk->count() > 0;
  mc.has_eps = me->count() > 0;

  try {
    if (cgen->parsed()) return run_gen(gen);
    if (ccoh->parsed()) return run_coherence(coh);
    if (cmc->parsed()) return run_mc(mc);
    if (cgof->parsed()) return run_gof(gof);
    if (ccheck->parsed()) return run_check(check);
    if (ccard->parsed()) return run_card(card);
    if (ctail->parsed()) return run_tailprob(tail);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
