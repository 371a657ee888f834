#pragma once

// Experiment drivers behind the command-line tool. Every run is a pure
// function of its RunConfig: task s draws from make_rng(seed, s) and results
// are gathered in task order, so the worker count never changes the output.

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lgle/bridge.hpp"
#include "lgle/coupling.hpp"
#include "lgle/empirical.hpp"
#include "lgle/errors.hpp"
#include "lgle/gibbs.hpp"
#include "lgle/io.hpp"
#include "lgle/polymer.hpp"
#include "lgle/rng.hpp"
#include "lgle/scaling.hpp"
#include "lgle/special_functions.hpp"

namespace lgle {

struct RunConfig {
  std::string command;
  double theta = 1.0;
  int N = 8;
  int k = 1;
  int T = 5;
  double r = 0.5;
  int samples = 100;
  int sweeps = 0;  // 0: exact sampling where available
  int grid = 0;    // 0: module default
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "lgle_out";
  std::string format = "csv";
  std::vector<double> x, y, z;
  double shift = 0.0;
  std::string interaction = "exp";
  int n_mc = 200;
  double tw_n = 0.0;
  bool allow_k3 = false;
  std::string in;

  void validate() const {
    detail::require(workers >= 1, "--workers must be >= 1");
    detail::require(samples >= 1, "--samples must be >= 1");
    detail::require(sweeps >= 0 && grid >= 0, "--sweeps and --grid must be >= 0");
    detail::require(format == "csv" || format == "json", "--format must be csv or json");
    detail::require(interaction == "exp" || interaction == "zero", "--interaction must be exp or zero");
    detail::require(!out.empty(), "--out must not be empty");
  }

  static std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
    return s;
  }

  // Effective configuration as ordered key/value strings. The worker count is
  // left out since it never changes any emitted value.
  std::vector<std::pair<std::string, std::string>> entries() const {
    return {{"command", command},
            {"theta", format_double(theta)},
            {"n", std::to_string(N)},
            {"k", std::to_string(k)},
            {"t", std::to_string(T)},
            {"r", format_double(r)},
            {"samples", std::to_string(samples)},
            {"sweeps", std::to_string(sweeps)},
            {"grid", std::to_string(grid)},
            {"seed", std::to_string(seed)},
            {"out", out},
            {"format", format},
            {"x", join(x)},
            {"y", join(y)},
            {"z", join(z)},
            {"shift", format_double(shift)},
            {"interaction", interaction},
            {"n_mc", std::to_string(n_mc)},
            {"tw_n", format_double(tw_n)},
            {"allow_k3", allow_k3 ? "true" : "false"},
            {"in", in}};
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [k_, v] : entries()) j[k_] = v;
    return j;
  }
};

struct RunOutput {
  CsvTable data;
  nlohmann::ordered_json summary;
};

// Runs f(0..n-1) on `workers` threads and returns results in index order. The
// exception of the lowest failing index is rethrown.
template <typename F>
auto parallel_map(int n, int workers, F&& f) -> std::vector<decltype(f(0))> {
  using R = decltype(f(0));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(f(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < std::min(workers, n); ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace detail {

inline constexpr std::uint64_t kDiagnosticStream = 0xD1A6;
inline constexpr std::uint64_t kAcceptanceStream = 0xACCE;

inline nlohmann::ordered_json mean_json(const std::vector<double>& v) {
  const MeanEstimate m = mean_estimate(v);
  return {{"mean", m.mean}, {"std_error", m.std_error}, {"n", m.n}};
}

inline void add_meta(CsvTable& t, const RunConfig& cfg) { t.meta = cfg.entries(); }

inline std::vector<double> default_levels(int k, double spacing) {
  std::vector<double> v;
  for (int i = 0; i < k; ++i) v.push_back(-spacing * i);
  return v;
}

inline Interaction interaction_of(const RunConfig& cfg) {
  return cfg.interaction == "zero" ? Interaction::zero() : Interaction::exp_kind();
}

inline std::vector<double> bottom_of(const RunConfig& cfg) {
  if (cfg.z.empty()) return std::vector<double>(static_cast<std::size_t>(cfg.T), -kInf);
  if (cfg.z.size() == 1) return std::vector<double>(static_cast<std::size_t>(cfg.T), cfg.z[0]);
  require(static_cast<int>(cfg.z.size()) == cfg.T, "--z needs one value or one value per time");
  return cfg.z;
}

inline void add_ensemble_rows(CsvTable& t, int sample, const DiscreteLineEnsemble& L) {
  for (int i = L.first_curve(); i <= L.last_curve(); ++i)
    for (int j = L.T0(); j <= L.T1(); ++j)
      t.rows.push_back({static_cast<double>(sample), static_cast<double>(i), static_cast<double>(j), L.at(i, j)});
}

}  // namespace detail

// Per-sample statistics of polymer ensembles: the Tracy-Widom statistic at
// tw_n, extrema of L_1(x) - p x over [-r N^{2/3}, r N^{2/3}] and, with at
// least two curves, the gap and acceptance diagnostics of the top k - 1
// curves over that window.
inline nlohmann::ordered_json polymer_statistics(const std::vector<DiscreteLineEnsemble>& ensembles, const RunConfig& cfg) {
  const ScalingConstants c = scaling_constants(ThetaParam(cfg.theta));
  struct Row {
    double tw, sup, inf, gap = 0.0, gap_bottom = 0.0, acceptance = 0.0;
  };
  const auto rows = parallel_map(static_cast<int>(ensembles.size()), cfg.workers, [&](int s) {
    const DiscreteLineEnsemble& L = ensembles[static_cast<std::size_t>(s)];
    Row row{};
    row.tw = tw_statistic(L, c, cfg.N, cfg.tw_n);
    const WindowExtrema e = window_extrema(L, c, cfg.N, cfg.r, 1);
    row.sup = e.sup;
    row.inf = e.inf;
    if (L.curves() >= 2) {
      Rng rng = make_rng(task_seed(cfg.seed, detail::kDiagnosticStream), static_cast<std::uint64_t>(s));
      const StatReport d = gap_and_acceptance_diagnostics(L, c, cfg.N, cfg.r, L.curves() - 1, cfg.n_mc, rng);
      row.gap = d.find("min_gap") ? d.value("min_gap") : kInf;
      row.gap_bottom = d.value("min_gap_bottom");
      row.acceptance = d.value("acceptance");
    }
    return row;
  });
  std::vector<double> tw, sup, inf, gap, gap_bottom, acc;
  for (const auto& r : rows) {
    tw.push_back(r.tw);
    sup.push_back(r.sup);
    inf.push_back(r.inf);
    if (ensembles.front().curves() >= 2) {
      if (ensembles.front().curves() >= 3) gap.push_back(r.gap);
      gap_bottom.push_back(r.gap_bottom);
      acc.push_back(r.acceptance);
    }
  }
  nlohmann::ordered_json j;
  j["tw_statistic"] = detail::mean_json(tw);
  j["tw_statistic"]["samples"] = tw;
  j["window_sup"] = detail::mean_json(sup);
  j["window_inf"] = detail::mean_json(inf);
  if (!gap.empty()) j["min_gap"] = detail::mean_json(gap);
  if (!acc.empty()) {
    j["min_gap_bottom"] = detail::mean_json(gap_bottom);
    j["acceptance"] = detail::mean_json(acc);
  }
  return j;
}

inline void check_polymer_config(const RunConfig& cfg) {
  detail::require(cfg.N >= 1, "--n must be >= 1");
  detail::require(cfg.k >= 1 && cfg.k <= cfg.N, "--k must lie in [1, n]");
  detail::require(cfg.r > 0.0, "--r must be positive");
  if (cfg.r * kpz_time_scale(cfg.N) > cfg.N)
    throw DomainError("--n too small for the requested --r window: need r n^{2/3} <= n");
  if (std::abs(cfg.tw_n) * kpz_time_scale(cfg.N) > cfg.N) throw DomainError("--tw-n outside the ensemble");
  if (cfg.k >= 2) detail::require(cfg.n_mc >= 100, "--n-mc must be >= 100");
}

inline RunOutput run_polymer(const RunConfig& cfg) {
  cfg.validate();
  check_polymer_config(cfg);
  const ThetaParam theta(cfg.theta);
  const auto ensembles = parallel_map(cfg.samples, cfg.workers, [&](int s) {
    return polymer_line_ensemble(theta, cfg.N, cfg.k, task_seed(cfg.seed, static_cast<std::uint64_t>(s)));
  });
  RunOutput out;
  detail::add_meta(out.data, cfg);
  out.data.header = {"sample", "i", "j", "value"};
  for (int s = 0; s < cfg.samples; ++s) detail::add_ensemble_rows(out.data, s, ensembles[static_cast<std::size_t>(s)]);
  out.summary["config"] = cfg.to_json();
  const ScalingConstants c = scaling_constants(theta);
  out.summary["constants"] = {{"p", c.p},         {"lambda", c.lambda},       {"sigma_p", c.sigma_p},
                              {"d_theta_1", c.d_theta_1}, {"h_theta_1", c.h_theta_1}};
  out.summary["statistics"] = polymer_statistics(ensembles, cfg);
  return out;
}

// Recomputes the polymer statistics from a stored polymer CSV.
inline RunOutput run_stats(const RunConfig& cfg, const CsvTable& input) {
  cfg.validate();
  check_polymer_config(cfg);
  const std::size_t cs = input.column("sample"), ci = input.column("i"), cj = input.column("j"),
                    cv = input.column("value");
  int n_samples = 0;
  for (const auto& row : input.rows) n_samples = std::max(n_samples, static_cast<int>(row[cs]) + 1);
  detail::require(n_samples >= 1, "stats: input has no samples");
  std::vector<DiscreteLineEnsemble> ensembles(static_cast<std::size_t>(n_samples),
                                              DiscreteLineEnsemble(cfg.k, -cfg.N, cfg.N));
  std::vector<int> filled(static_cast<std::size_t>(n_samples), 0);
  for (const auto& row : input.rows) {
    const int s = static_cast<int>(row[cs]), i = static_cast<int>(row[ci]), j = static_cast<int>(row[cj]);
    if (s < 0 || i < 1 || i > cfg.k || j < -cfg.N || j > cfg.N)
      throw DomainError("stats: row outside the configured ensemble shape");
    ensembles[static_cast<std::size_t>(s)].at(i, j) = row[cv];
    ++filled[static_cast<std::size_t>(s)];
  }
  for (int f : filled)
    if (f != cfg.k * (2 * cfg.N + 1)) throw DomainError("stats: incomplete ensemble in input");
  RunOutput out;
  detail::add_meta(out.data, cfg);
  out.data.header = {"sample", "tw_statistic"};
  out.summary["config"] = cfg.to_json();
  out.summary["statistics"] = polymer_statistics(ensembles, cfg);
  const auto& tw = out.summary["statistics"]["tw_statistic"]["samples"];
  for (int s = 0; s < n_samples; ++s) out.data.rows.push_back({static_cast<double>(s), tw[s].get<double>()});
  return out;
}

inline RunOutput run_bridge(const RunConfig& cfg) {
  cfg.validate();
  detail::require(cfg.T >= 2, "--t must be >= 2");
  const double x = cfg.x.empty() ? 0.0 : cfg.x.front(), y = cfg.y.empty() ? 0.0 : cfg.y.front();
  const HrwSpec hrw = HrwSpec::log_gamma(cfg.theta);
  const BridgeSpec spec{0, cfg.T - 1, x, y, hrw};
  spec.validate();
  const BridgeLaw law(hrw, std::max(1, cfg.T - 2), cfg.grid ? cfg.grid : kDefaultGridPoints);
  const auto paths = parallel_map(cfg.samples, cfg.workers, [&](int s) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(s));
    return cfg.sweeps > 0 ? sample_bridge_mcmc(law, spec, cfg.sweeps, rng) : sample_bridge_sequential(law, spec, rng);
  });
  RunOutput out;
  detail::add_meta(out.data, cfg);
  out.data.header = {"sample", "t", "value"};
  for (int s = 0; s < cfg.samples; ++s)
    for (int t = 0; t < cfg.T; ++t)
      out.data.rows.push_back({static_cast<double>(s), static_cast<double>(t), paths[static_cast<std::size_t>(s)][t]});
  out.summary["config"] = cfg.to_json();
  out.summary["method"] = cfg.sweeps > 0 ? "mcmc" : "sequential";
  nlohmann::ordered_json means = nlohmann::ordered_json::array();
  bool pinned = true;
  for (int t = 0; t < cfg.T; ++t) {
    std::vector<double> col;
    for (const auto& p : paths) col.push_back(p[t]);
    means.push_back(detail::mean_json(col));
  }
  for (const auto& p : paths) pinned = pinned && p.front() == x && p.back() == y;
  out.summary["endpoints_pinned"] = pinned;
  out.summary["mean_by_time"] = means;
  return out;
}

inline EnsembleSpec ensemble_spec_of(const RunConfig& cfg) {
  detail::require(cfg.k >= 1 && cfg.T >= 2, "ensemble: need --k >= 1 and --t >= 2");
  EnsembleSpec spec;
  spec.k1 = 1;
  spec.k2 = cfg.k;
  spec.a = 0;
  spec.b = cfg.T - 1;
  spec.x = cfg.x.empty() ? detail::default_levels(cfg.k, 2.0) : cfg.x;
  spec.y = cfg.y.empty() ? detail::default_levels(cfg.k, 2.0) : cfg.y;
  spec.f.assign(static_cast<std::size_t>(cfg.T), kInf);
  spec.g = detail::bottom_of(cfg);
  spec.hrw = HrwSpec::log_gamma(cfg.theta);
  spec.interaction = InteractionSpec::uniform(detail::interaction_of(cfg), 0, cfg.T - 1);
  spec.validate();
  return spec;
}

inline RunOutput run_ensemble(const RunConfig& cfg) {
  cfg.validate();
  const EnsembleSpec spec = ensemble_spec_of(cfg);
  const GibbsModel model(spec, cfg.grid ? cfg.grid : kDefaultGridPoints);
  struct Draw {
    DiscreteLineEnsemble L;
    long attempts;
  };
  const auto draws = parallel_map(cfg.samples, cfg.workers, [&](int s) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(s));
    if (cfg.sweeps > 0) return Draw{model.sample_mcmc(cfg.sweeps, rng), 0};
    RejectionDraw d = model.sample_rejection(rng);
    return Draw{std::move(d.ensemble), d.attempts};
  });
  Rng acc_rng = make_rng(task_seed(cfg.seed, detail::kAcceptanceStream), 0);
  const AcceptanceEstimate z = model.acceptance_probability(std::max(100, cfg.n_mc), acc_rng);
  RunOutput out;
  detail::add_meta(out.data, cfg);
  out.data.header = {"sample", "i", "j", "value"};
  std::vector<double> attempts;
  for (int s = 0; s < cfg.samples; ++s) {
    detail::add_ensemble_rows(out.data, s, draws[static_cast<std::size_t>(s)].L);
    attempts.push_back(static_cast<double>(draws[static_cast<std::size_t>(s)].attempts));
  }
  out.summary["config"] = cfg.to_json();
  out.summary["method"] = cfg.sweeps > 0 ? "mcmc" : "rejection";
  out.summary["acceptance"] = z.to_json();
  if (cfg.sweeps == 0) out.summary["attempts"] = detail::mean_json(attempts);
  return out;
}

inline RunOutput run_couple(const RunConfig& cfg) {
  cfg.validate();
  detail::require(cfg.shift >= 0.0, "--shift must be >= 0");
  CouplingProblem problem;
  problem.k = cfg.k;
  problem.T = cfg.T;
  problem.hrw = HrwSpec::log_gamma(cfg.theta);
  problem.allow_k3 = cfg.allow_k3;
  if (cfg.interaction == "zero")
    problem.interaction = InteractionSpec::uniform(Interaction::zero(), 0, std::max(1, cfg.T - 1));
  problem.validate();
  BoundaryTriple low{cfg.x.empty() ? detail::default_levels(cfg.k, 2.0) : cfg.x,
                     cfg.y.empty() ? detail::default_levels(cfg.k, 2.0) : cfg.y, detail::bottom_of(cfg)};
  low.validate(cfg.k, cfg.T);
  const BoundaryTriple high = low.shifted(cfg.shift);
  const BoundaryTriple both[] = {low, high};
  const GridSpec grid = coupling_grid(problem, both, cfg.grid ? cfg.grid : kDefaultCouplingGridPoints);
  const CouplingSolver lo(problem, low, grid), hi(problem, high, grid);
  struct Pair {
    DiscreteLineEnsemble a, b;
  };
  const auto pairs = parallel_map(cfg.samples, cfg.workers, [&](int s) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(s));
    const CouplingUniforms u = CouplingUniforms::draw(lo.order().size(), rng);
    return Pair{lo.sample(u), hi.sample(u)};
  });
  MonotonicityReport rep;
  rep.n_draws = cfg.samples;
  rep.grid_m = grid.m;
  rep.eps_grid = 1e-8 * (grid.hi - grid.lo);
  RunOutput out;
  detail::add_meta(out.data, cfg);
  out.data.header = {"sample", "i", "j", "low", "high"};
  for (int s = 0; s < cfg.samples; ++s) {
    const Pair& p = pairs[static_cast<std::size_t>(s)];
    for (int i = 1; i <= cfg.k; ++i)
      for (int j = 0; j < cfg.T; ++j) {
        const double v = p.a.at(i, j) - p.b.at(i, j);
        rep.max_violation = std::max(rep.max_violation, v);
        if (v > rep.eps_grid) ++rep.violations;
        out.data.rows.push_back(
            {static_cast<double>(s), static_cast<double>(i), static_cast<double>(j), p.a.at(i, j), p.b.at(i, j)});
      }
  }
  out.summary["config"] = cfg.to_json();
  out.summary["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"m", grid.m}};
  out.summary["monotonicity"] = rep.to_json();
  return out;
}

// Writes <out>.csv and <out>.json for csv format, or a single <out>.json
// holding the summary and the data rows for json format.
inline std::vector<std::string> emit(const RunConfig& cfg, const RunOutput& o) {
  if (cfg.format == "csv") {
    write_csv(cfg.out + ".csv", o.data);
    write_json(cfg.out + ".json", o.summary);
    return {cfg.out + ".csv", cfg.out + ".json"};
  }
  nlohmann::ordered_json j = o.summary;
  j["columns"] = o.data.header;
  j["rows"] = o.data.rows;
  write_json(cfg.out + ".json", j);
  return {cfg.out + ".json"};
}

}  // namespace lgle
