#include "tcoh/study.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tcoh/coherence.hpp"
#include "tcoh/limitlaw.hpp"
#include "tcoh/rng.hpp"
#include "tcoh/version.hpp"

namespace tcoh {

std::uint64_t replication_seed(std::uint64_t master_seed, std::int64_t rep) {
  const std::uint64_t mix =
      0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(rep) + 1ull);
  return rng::splitmix64(master_seed ^ mix);
}

ReplicationResult run_replication(const ModelParams& params,
                                  const CoefficientWindow& window,
                                  std::uint64_t y_seed,
                                  std::int64_t block_size,
                                  std::uint64_t memory_budget,
                                  std::int64_t scan_tau) {
  MaSampler src(params, window, y_seed);
  ScanConfig cfg;
  cfg.tau = effective_scan_tau(params, scan_tau);
  if (cfg.tau >= params.p) {
    std::ostringstream msg;
    msg << "run_replication: scan distance " << cfg.tau
        << " leaves no pairs (p = " << params.p << ")";
    throw std::invalid_argument(msg.str());
  }
  cfg.block_size = block_size;
  cfg.memory_budget = memory_budget;
  cfg.threads = 1;
  cfg.mode = MeanMode::centered;
  const CoherenceResult res = tau_coherence_blockwise(src, cfg);
  ReplicationResult out;
  out.l = res.l_n_tau;
  out.t = normalize_statistic(res.l_n_tau, params.n, params.p);
  return out;
}

McSampleSet run_study(const StudyConfig& config) {
  config.params.validate();
  if (config.replications < 1)
    throw std::invalid_argument("run_study: replications >= 1 required");
  if (config.window && !config.window->compatible_with(config.params))
    throw std::invalid_argument(
        "run_study: explicit window inconsistent with model parameters");

  const std::int64_t R = config.replications;
  McSampleSet out;
  out.params = config.params;
  out.master_seed = config.master_seed;
  out.replications = R;
  out.redraw_window = config.redraw_window;
  out.scan_tau = effective_scan_tau(config.params, config.scan_tau);
  // Shared window for the default (non-redraw) mode, drawn from the master
  // seed before the replication loop.
  CoefficientWindow shared;
  if (config.window) {
    shared = *config.window;
  } else if (!config.redraw_window) {
    shared = build_window(config.params.tau, config.params.K,
                          config.params.eps_n, config.master_seed);
  }

  // Per-index scratch so the compaction below is deterministic regardless of
  // which thread ran which replication.
  std::vector<double> tv(static_cast<std::size_t>(R), 0.0);
  std::vector<double> lv(static_cast<std::size_t>(R), 0.0);
  std::vector<std::string> err(static_cast<std::size_t>(R));
  std::vector<char> ok(static_cast<std::size_t>(R), 1);

  const int nt = resolve_threads(config.threads);
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (std::int64_t r = 0; r < R; ++r) {
    const auto i = static_cast<std::size_t>(r);
    try {
      const std::uint64_t seed_r = replication_seed(config.master_seed, r);
      const CoefficientWindow* w = &shared;
      CoefficientWindow own;
      if (!config.window && config.redraw_window) {
        own = build_window(config.params.tau, config.params.K,
                           config.params.eps_n, seed_r);
        w = &own;
      }
      const ReplicationResult res =
          run_replication(config.params, *w, seed_r, config.block_size,
                          config.memory_budget, config.scan_tau);
      lv[i] = res.l;
      tv[i] = res.t;
    } catch (const std::exception& e) {
      ok[i] = 0;
      err[i] = e.what();
    } catch (...) {
      ok[i] = 0;
      err[i] = "unknown error";
    }
  }

  // A failed replication is recorded with its seed and excluded from the
  // samples; it is never silently dropped.
  out.t.reserve(static_cast<std::size_t>(R));
  out.l.reserve(static_cast<std::size_t>(R));
  for (std::int64_t r = 0; r < R; ++r) {
    const auto i = static_cast<std::size_t>(r);
    if (ok[i]) {
      out.t.push_back(tv[i]);
      out.l.push_back(lv[i]);
    } else {
      out.failures.push_back(
          {r, replication_seed(config.master_seed, r), err[i]});
    }
  }
  return out;
}

void write_samples_csv(const std::string& path, const McSampleSet& samples) {
  if (samples.replications != static_cast<std::int64_t>(samples.t.size()) +
                                  static_cast<std::int64_t>(
                                      samples.failures.size()))
    throw std::invalid_argument(
        "write_samples_csv: replications does not match sample count");
  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["n"] = samples.params.n;
  meta["p"] = samples.params.p;
  meta["tau"] = samples.params.tau;
  meta["K"] = samples.params.K;
  meta["eps_n"] = samples.params.eps_n;
  meta["scan_tau"] = samples.scan_tau;
  meta["master_seed"] = samples.master_seed;
  meta["replications"] = samples.replications;
  meta["redraw_window"] = samples.redraw_window;
  if (!samples.failures.empty()) {  // absent key keeps clean runs byte-stable
    nlohmann::json fl = nlohmann::json::array();
    for (const ReplicationFailure& f : samples.failures)
      fl.push_back({{"rep", f.rep}, {"seed", f.seed}, {"message", f.message}});
    meta["failures"] = fl;
  }

  std::ofstream outf(path, std::ios::binary);  // binary: no newline mangling
  if (!outf)
    throw std::runtime_error("write_samples_csv: cannot open '" + path + "'");
  outf << "# " << meta.dump() << "\n";
  char buf[64];
  for (const double t : samples.t) {
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    outf << buf << "\n";
  }
  if (!outf)
    throw std::runtime_error("write_samples_csv: write failed for '" + path + "'");
}

McSampleSet read_samples_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("read_samples_csv: cannot open '" + path + "'");
  McSampleSet out;
  bool have_meta = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (have_meta) continue;  // only the first metadata line is binding
      nlohmann::json meta;
      try {
        meta = nlohmann::json::parse(line.substr(1));
      } catch (const std::exception& e) {
        throw std::runtime_error("read_samples_csv: bad metadata in '" + path +
                                 "': " + e.what());
      }
      try {
        out.params.n = meta.at("n").get<std::int64_t>();
        out.params.p = meta.at("p").get<std::int64_t>();
        out.params.tau = meta.at("tau").get<std::int64_t>();
        out.params.K = meta.at("K").get<std::int64_t>();
        out.params.eps_n = meta.at("eps_n").get<double>();
        out.scan_tau = meta.at("scan_tau").get<std::int64_t>();
        out.master_seed = meta.at("master_seed").get<std::uint64_t>();
        out.replications = meta.at("replications").get<std::int64_t>();
        out.redraw_window = meta.at("redraw_window").get<bool>();
        if (meta.contains("failures"))
          for (const nlohmann::json& f : meta.at("failures"))
            out.failures.push_back({f.at("rep").get<std::int64_t>(),
                                    f.at("seed").get<std::uint64_t>(),
                                    f.at("message").get<std::string>()});
      } catch (const std::exception& e) {
        throw std::runtime_error("read_samples_csv: missing metadata field in '" +
                                 path + "': " + e.what());
      }
      have_meta = true;
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str())
      throw std::runtime_error("read_samples_csv: non-numeric line in '" +
                               path + "': " + line);
    out.t.push_back(v);
  }
  if (!have_meta)
    throw std::runtime_error("read_samples_csv: no metadata line in '" + path +
                             "'");
  if (out.replications != static_cast<std::int64_t>(out.t.size()) +
                              static_cast<std::int64_t>(out.failures.size())) {
    std::ostringstream msg;
    msg << "read_samples_csv: '" << path << "' declares " << out.replications
        << " replications but contains " << out.t.size() << " samples and "
        << out.failures.size() << " recorded failures";
    throw std::runtime_error(msg.str());
  }
  return out;
}

TailProbResult estimate_tail_probability(std::int64_t n, std::int64_t p,
                                         double y, double rho,
                                         std::int64_t replications,
                                         std::uint64_t seed, int threads) {
  if (n < 1)
    throw std::invalid_argument("estimate_tail_probability: n >= 1 required");
  if (replications < 1)
    throw std::invalid_argument(
        "estimate_tail_probability: replications >= 1 required");
  if (!(rho > -1.0 && rho < 1.0))
    throw std::invalid_argument(
        "estimate_tail_probability: |rho| < 1 required");
  const double a = threshold_a_n(n, p, y);  // validates p and the radicand
  const double cross = std::sqrt(1.0 - rho * rho);
  const int nt = resolve_threads(threads);

  std::int64_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits) num_threads(nt)
  for (std::int64_t r = 0; r < replications; ++r) {
    const std::uint64_t stream = static_cast<std::uint64_t>(r) + 1;
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      double z0, z1;
      rng::normal_pair(seed, stream, static_cast<std::uint64_t>(i), &z0, &z1);
      s += z0 * (rho * z0 + cross * z1);
    }
    if (std::fabs(s) > a) ++hits;
  }

  TailProbResult res;
  res.hits = hits;
  res.replications = replications;
  res.threshold = a;
  res.p_hat = static_cast<double>(hits) / static_cast<double>(replications);
  res.half_width = 1.96 * std::sqrt(res.p_hat * (1.0 - res.p_hat) /
                                    static_cast<double>(replications));
  res.p0 = asymptotic_tail_p0(n, p, y);
  res.ratio = res.p_hat / res.p0;
  return res;
}

}  // namespace tcoh
