// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lgle/bridge.hpp"
#include "lgle/coupling.hpp"
#include "lgle/gibbs.hpp"
#include "lgle/gue.hpp"
#include "lgle/polymer.hpp"
#include "lgle/scaling.hpp"
#include "lgle/special_functions.hpp"
#include "stat_helpers.hpp"

using namespace lgle;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok " : "FAILED ") + what);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double rel_err(double log_a, double log_b) {
  if (log_a == log_b) return 0.0;
  return std::abs(std::expm1(log_a - log_b));
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------

Outcome polymer_oracle_triangle() {
  Outcome out;
  Rng pick(101);
  std::uniform_real_distribution<double> theta_dist(0.5, 4.0);
  double worst_lgv = 0.0, worst_single = 0.0, worst_telescope = 0.0;
  long triples = 0;
  for (int f = 0; f < 200; ++f) {
    const ThetaParam theta(theta_dist(pick));
    const WeightField d = sample_weight_field(theta, 5, 4, task_seed(1, static_cast<std::uint64_t>(f)));
    const LogMatrix single = single_path_partition(d, 5, 4);
    for (int k = 1; k <= 4; ++k)
      for (int n = 1; n <= 5; ++n)
        for (int l = 1; l <= std::min(k, n); ++l) {
          const double brute = tau_bruteforce(d, k, l, n);
          worst_lgv = std::max(worst_lgv, rel_err(tau_lgv(d, k, l, n), brute));
          if (l == 1) worst_single = std::max(worst_single, rel_err(single(n, k), brute));
          ++triples;
        }
    const PartitionTable table = build_partition_table(d, 1, 4, 4, 5);
    for (int k = 1; k <= 4; ++k) {
      const ZArray z = z_array(table, k, 1, 5);
      for (int n = 1; n <= 5; ++n) {
        double acc = 0.0;
        for (int l = 1; l <= std::min(k, n); ++l) {
          acc += z.log_z(l, n);
          const double target = table.log_tau(k, l, n);
          worst_telescope = std::max(worst_telescope, std::abs(acc - target) / std::max(1.0, std::abs(target)));
        }
      }
    }
  }
  out.check(worst_lgv <= 1e-9, "tau_lgv vs tau_bruteforce max rel err " + fmt(worst_lgv) + " over " +
                                   std::to_string(triples) + " (field,k,l,n)");
  out.check(worst_single <= 1e-9, "single_path_partition vs tau_bruteforce (l=1) max rel err " + fmt(worst_single));
  out.check(worst_telescope <= 1e-13, "z-array partial sums reproduce log tau, max err " + fmt(worst_telescope));
  return out;
}

Outcome special_functions() {
  Outcome out;
  double rec = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double z = 0.05 * i;
    rec = std::max(rec, std::abs(digamma(z + 1.0) - digamma(z) - 1.0 / z));
  }
  out.check(rec <= 1e-9, "digamma recurrence on 100 points, max err " + fmt(rec));

  double round = 0.0, sym = 0.0, fd = 0.0;
  bool lambda_positive = true;
  std::string lambdas;
  for (double theta : {0.25, 0.5, 1.0, 2.0, 5.0}) {
    const ThetaParam th(theta);
    for (int i = 1; i <= 100; ++i) {
      const double x = std::pow(10.0, -2.0 + 4.0 * (i - 1) / 99.0);
      round = std::max(round, std::abs(g_theta(th, g_theta_inv(th, x)) - x) / std::max(1.0, x));
      const double z = theta * i / 101.0;
      round = std::max(round, std::abs(g_theta_inv(th, g_theta(th, z)) - z));
    }
    sym = std::max(sym, std::abs(g_theta(th, theta / 2.0) - 1.0));
    const double step = 1e-5;
    const double deriv = (h_theta(th, 1.0 + step) - h_theta(th, 1.0 - step)) / (2.0 * step);
    fd = std::max(fd, std::abs(deriv - digamma(theta / 2.0)));
    const double lambda = scaling_constants(th).lambda;
    lambda_positive = lambda_positive && lambda > 0.0;
    lambdas += fmt(lambda) + " ";
  }
  out.check(round <= 1e-9, "g and g^-1 round trips on 100-point grids, max err " + fmt(round));
  out.check(sym <= 1e-12, "g_theta(theta/2) = 1, max err " + fmt(sym));
  out.check(fd <= 1e-6, "central difference h'_theta(1) vs digamma(theta/2), max err " + fmt(fd));
  out.check(lambda_positive, "lambda > 0 on theta set: " + lambdas);
  return out;
}

std::vector<double> column(const std::vector<std::vector<double>>& paths, int m) {
  std::vector<double> v;
  v.reserve(paths.size());
  for (const auto& p : paths) v.push_back(p[static_cast<std::size_t>(m)]);
  return v;
}

double grid_cdf_at(const GridDensity& g, const std::vector<double>& cdf, double t) {
  if (t <= g.lo) return 0.0;
  if (t >= g.hi) return 1.0;
  const double pos = (t - g.lo) / g.step();
  const int i = std::min(static_cast<int>(pos), g.m() - 2);
  const double w = pos - i;
  return (1.0 - w) * cdf[static_cast<std::size_t>(i)] + w * cdf[static_cast<std::size_t>(i) + 1];
}

Outcome bridge_correctness() {
  Outcome out;
  const auto t0 = Clock::now();
  const int T = 10, n = 10000;
  const BridgeLaw law(HrwSpec::log_gamma(1.0), T - 1);
  const BridgeSpec spec{0, T, 0.3, 7.1, law.hrw()};
  Rng rng = make_rng(3, 0);
  std::vector<std::vector<double>> seq;
  for (int s = 0; s < n; ++s) seq.push_back(sample_bridge_sequential(law, spec, rng));

  bool pinned = true;
  for (const auto& p : seq) pinned = pinned && p.front() == spec.x && p.back() == spec.y;
  out.check(pinned, "endpoints pinned bitwise in all samples");

  double worst_z = 0.0;
  for (int m = 1; m < T; ++m) {
    const auto [mean, se] = test::mean_and_se(column(seq, m));
    worst_z = std::max(worst_z, std::abs(mean - (spec.x + m * (spec.y - spec.x) / T)) / se);
  }
  out.check(worst_z <= 4.0, "linear mean at every interior time, worst |z| " + fmt(worst_z));

  const GridDensity q = bridge_marginal_density(law, spec, T / 2);
  const auto cdf = q.cdf();
  const double ks_quad =
      test::ks_one_sample(column(seq, T / 2), [&](double t) { return grid_cdf_at(q, cdf, t); });
  out.check(ks_quad < 0.02, "midpoint sequential vs quadrature KS " + fmt(ks_quad));

  Rng mrng = make_rng(3, 1);
  std::vector<double> mcmc_mid;
  for (int s = 0; s < n; ++s) mcmc_mid.push_back(sample_bridge_mcmc(law, spec, 200, mrng)[T / 2]);
  const double ks_mcmc = test::ks_two_sample(column(seq, T / 2), mcmc_mid);
  out.check(ks_mcmc < 0.02, "midpoint sequential vs MCMC KS " + fmt(ks_mcmc));

  for (double theta : {1.0, 2.5}) {
    const GridDensity g = hrw_density(HrwSpec::log_gamma(theta));
    const auto gc = g.cdf();
    Rng irng = make_rng(3, theta == 1.0 ? 2 : 3);
    std::vector<double> u;
    for (int s = 0; s < n; ++s) u.push_back(std::exp(-inverse_cdf(gc, g.lo, g.step(), uniform_open(irng))));
    const double ks = test::ks_one_sample(u, [&](double t) { return test::gamma_cdf(theta, t); });
    out.check(ks < 0.02, "exp(-increment) vs Gamma(" + fmt(theta) + ",1) KS " + fmt(ks));
  }
  const double secs = seconds_since(t0);
  out.check(secs < 180.0, "runtime " + fmt(secs) + " s < 180 s");
  return out;
}

EnsembleSpec two_curve_spec(const Interaction& h, int T) {
  return free_boundary_spec(1, 2, 0, T - 1, {0.0, -2.0}, {1.0, -1.0}, default_hrw(), h);
}

Outcome gibbs_measure() {
  Outcome out;
  const int T = 8, n = 10000;
  {
    const GibbsModel zero(two_curve_spec(Interaction::zero(), T));
    Rng rng = make_rng(4, 0);
    const AcceptanceEstimate z = zero.acceptance_probability(1000, rng);
    out.check(z.estimate == 1.0 && z.std_error == 0.0, "zero interaction: Z estimate exactly " + fmt(z.estimate));
    long max_attempts = 0;
    for (int s = 0; s < 1000; ++s) max_attempts = std::max(max_attempts, zero.sample_rejection(rng).attempts);
    out.check(max_attempts == 1, "zero interaction: every rejection draw accepted on attempt 1");
  }

  const GibbsModel model(two_curve_spec(Interaction::exp_kind(), T));
  Rng rrng = make_rng(4, 1), mrng = make_rng(4, 2);
  std::vector<DiscreteLineEnsemble> exact, chains;
  for (int s = 0; s < n; ++s) exact.push_back(model.sample_rejection(rrng).ensemble);
  const int n_chains = 2000, per_chain = n / n_chains;
  for (int c = 0; c < n_chains; ++c) {
    DiscreteLineEnsemble L = model.sample_mcmc(100, mrng);
    for (int s = 0; s < per_chain; ++s) {
      for (int t = 0; t < 10; ++t) model.mcmc_sweep(L, mrng);
      chains.push_back(L);
    }
  }
  double worst = 0.0;
  for (int i = 1; i <= 2; ++i)
    for (int m : {1, 2, 4, 6}) {
      std::vector<double> a, b;
      for (const auto& L : exact) a.push_back(L.at(i, m));
      for (const auto& L : chains) b.push_back(L.at(i, m));
      worst = std::max(worst, test::ks_two_sample(a, b));
    }
  out.check(worst < 0.03, "rejection vs MCMC probe marginals (k=2, T=8), max KS " + fmt(worst));

  const EnsembleSpec three = free_boundary_spec(1, 3, 0, 6, {0.0, -2.0, -4.0}, {0.5, -1.5, -3.5}, default_hrw(),
                                                Interaction::exp_kind());
  Rng irng = make_rng(4, 3);
  const StatReport inv = gibbs_invariance_check(GibbsModel(three), SubBox{1, 2, 1, 5}, 2000, irng);
  out.check(inv.value("rejected") == 0.0, "Gibbs invariance resampling: max KS " + fmt(inv.value("max_ks")) +
                                              " vs 1% critical " + fmt(inv.value("ks_critical_1pct")));

  EnsembleSpec raised = two_curve_spec(Interaction::exp_kind(), T);
  std::vector<AcceptanceEstimate> zs;
  std::string trail;
  for (double level : {-6.0, -4.5, -3.0, -1.5, 0.0}) {
    raised.g.assign(raised.g.size(), level);
    Rng zrng = make_rng(4, 4);
    zs.push_back(acceptance_probability(raised, 4000, zrng));
    trail += fmt(zs.back().estimate) + " ";
  }
  bool monotone = true;
  for (std::size_t j = 1; j < zs.size(); ++j)
    monotone = monotone &&
               zs[j].estimate <= zs[j - 1].estimate + 3.0 * std::hypot(zs[j].std_error, zs[j - 1].std_error);
  out.check(monotone, "Z nonincreasing as g is raised (3 sigma): " + trail);
  return out;
}

Outcome grand_coupling() {
  Outcome out;
  const auto t0 = Clock::now();
  auto problem = [](int k, int T) {
    CouplingProblem p;
    p.k = k;
    p.T = T;
    p.hrw = HrwSpec::log_gamma(1.0);
    return p;
  };

  {
    const BoundaryTriple b{{0.25, -1.5}, {-0.75, -2.0}, {-5.0, -4.0}};
    Rng rng = make_rng(5, 0);
    bool identity = true;
    for (int s = 0; s < 10; ++s) {
      const auto L = grand_coupling_sample(problem(2, 2), b, CouplingUniforms::draw(0, rng));
      identity = identity && L.at(1, 0) == 0.25 && L.at(1, 1) == -0.75 && L.at(2, 0) == -1.5 && L.at(2, 1) == -2.0;
    }
    out.check(identity, "T=2 returns the boundary data exactly");
  }

  {
    const int k = 2, T = 5, n = 5000;
    const CouplingProblem p = problem(k, T);
    const BoundaryTriple b{{0.5, -1.0}, {1.0, -0.5}, {-3.0, -2.5, -3.5, -2.0, -2.5}};
    const BoundaryTriple one[] = {b};
    const CouplingSolver solver(p, b, coupling_grid(p, one));
    EnsembleSpec spec{1, k, 0, T - 1, b.x, b.y, std::vector<double>(T, kInf), b.z, p.hrw,
                      InteractionSpec::uniform(Interaction::exp_kind(), 0, T - 1)};
    const GibbsModel model(spec);
    Rng r1 = make_rng(5, 1), r2 = make_rng(5, 2);
    std::vector<DiscreteLineEnsemble> coupled, exact;
    for (int s = 0; s < n; ++s) {
      coupled.push_back(solver.sample(CouplingUniforms::draw(solver.order().size(), r1)));
      exact.push_back(model.sample_rejection(r2).ensemble);
    }
    double worst = 0.0;
    for (int i = 1; i <= k; ++i)
      for (int t = 1; t <= T - 2; ++t) {
        std::vector<double> a, c;
        for (int s = 0; s < n; ++s) {
          a.push_back(coupled[static_cast<std::size_t>(s)].at(i, t));
          c.push_back(exact[static_cast<std::size_t>(s)].at(i, t));
        }
        worst = std::max(worst, test::ks_two_sample(a, c));
      }
    out.check(worst < 0.05, "coupled marginals vs rejection sampler (k=2, T=5, 5000 draws), max KS " + fmt(worst));
  }

  {
    Rng pick = make_rng(5, 3);
    std::uniform_real_distribution<double> U(-1.0, 1.0), up(0.0, 1.5);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    long violations = 0, draws = 0;
    double worst_coarse = 0.0, worst_fine = 0.0, worst_eps = 0.0;
    bool shrink = true;
    const int fine_draws = 100;
    for (int pair = 0; pair < 20; ++pair) {
      const int k = 1 + pair % 2, T = 3 + (pair / 2) % 4;
      const CouplingProblem p = problem(k, T);
      BoundaryTriple lo, hi;
      for (int i = 0; i < k; ++i) {
        lo.x.push_back(U(pick) - 1.5 * i);
        lo.y.push_back(U(pick) - 1.5 * i);
      }
      for (int t = 0; t < T; ++t) lo.z.push_back(pair % 5 == 0 && t % 2 == 0 ? neg_inf : U(pick) - 3.0 - 1.5 * k);
      hi = lo;
      for (auto& v : hi.x) v += up(pick);
      for (auto& v : hi.y) v += up(pick);
      for (auto& v : hi.z) v = std::isfinite(v) ? v + up(pick) : U(pick) - 3.0 - 1.5 * k;
      Rng rng = make_rng(50, static_cast<std::uint64_t>(pair));
      const MonotonicityReport coarse = monotonicity_check(p, lo, hi, 1000, rng, 256);
      Rng frng = make_rng(51, static_cast<std::uint64_t>(pair));
      const MonotonicityReport c_sub = monotonicity_check(p, lo, hi, fine_draws, frng, 256);
      frng = make_rng(51, static_cast<std::uint64_t>(pair));
      const MonotonicityReport fine = monotonicity_check(p, lo, hi, fine_draws, frng, 512);
      violations += coarse.violations;
      draws += coarse.n_draws;
      worst_coarse = std::max(worst_coarse, coarse.max_violation);
      worst_fine = std::max(worst_fine, fine.max_violation);
      worst_eps = std::max(worst_eps, coarse.eps_grid);
      const bool degenerate = c_sub.max_violation <= c_sub.eps_grid && fine.max_violation <= fine.eps_grid;
      shrink = shrink && (degenerate || fine.max_violation <= 0.5 * c_sub.max_violation);
    }
    out.check(violations == 0, "monotonicity over 20 ordered pairs x 1000 draws (k<=2, T<=6): " +
                                   std::to_string(violations) + " violations beyond eps_grid, max violation " +
                                   fmt(worst_coarse) + " (" + std::to_string(draws) + " draws)");
    out.check(shrink, "doubling grid resolution (256 -> 512, 100 draws per pair): max violation " + fmt(worst_coarse) +
                          " -> " + fmt(worst_fine) + (worst_coarse <= worst_eps ? " (already zero at 256)" : ""));
  }

  {
    const CouplingProblem p = problem(2, 5);
    const BoundaryTriple b{{0.5, -1.0}, {1.0, -0.5}, {-3.0, -2.5, -3.5, -2.0, -2.5}};
    Rng rng = make_rng(5, 4);
    bool monotone = true;
    std::string trail;
    for (int s = 0; s < 5; ++s) {
      const ContinuityReport r = continuity_check(p, b, 0.4, CouplingUniforms::draw(6, rng), 6);
      monotone = monotone && r.monotone_shrink;
      if (s == 0)
        for (double c : r.changes) trail += fmt(c) + " ";
    }
    out.check(monotone, "continuity probe shrinks monotonically as delta halves (5 omegas), e.g. " + trail);
  }
  const double secs = seconds_since(t0);
  out.check(secs < 600.0, "runtime " + fmt(secs) + " s < 600 s");
  return out;
}

Outcome kpz_fluctuations() {
  Outcome out;
  const auto t0 = Clock::now();
  const int N = 32, n = 2000;
  const ScalingConstants c = scaling_constants(ThetaParam(1.0));
  std::vector<double> tw;
  for (int s = 0; s < n; ++s) {
    const auto L = polymer_line_ensemble(ThetaParam(1.0), N, 1, task_seed(6, static_cast<std::uint64_t>(s)),
                                         PrecisionMode::Double);
    tw.push_back(tw_statistic(L, c, N, 0.0));
  }
  Rng grng = make_rng(6, 1'000'000);
  const EmpiricalCDF oracle = gue_tw_oracle(200, n, grng);
  const EmpiricalCDF sample(tw);
  const double ks = ks_distance(sample, oracle);
  const double diff = sample.mean() - oracle.mean();
  out.check(ks <= 0.2, "KS(tw_statistic at N=32, GUE M=200) " + fmt(ks));
  out.check(std::abs(diff) <= 0.5,
            "mean " + fmt(sample.mean()) + " vs GUE " + fmt(oracle.mean()) + ", |difference| " + fmt(std::abs(diff)));
  const double secs = seconds_since(t0);
  out.check(secs < 600.0, "runtime " + fmt(secs) + " s < 600 s");
  return out;
}

Outcome parabolic_profile() {
  Outcome out;
  const int N = 32, n_samples = 500;
  const ScalingConstants c = scaling_constants(ThetaParam(1.0));
  const double ts = kpz_time_scale(N), hs = kpz_height_scale(N);
  const std::vector<double> ns = {-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<std::vector<double>> values(ns.size());
  for (int s = 0; s < n_samples; ++s) {
    const auto L = polymer_line_ensemble(ThetaParam(1.0), N, 1, task_seed(7, static_cast<std::uint64_t>(s)),
                                         PrecisionMode::Double);
    for (std::size_t q = 0; q < ns.size(); ++q) {
      const double x = ns[q] * ts;
      values[q].push_back((L.eval(1, x) - c.p * x) / hs);
    }
  }
  std::vector<double> mean, se;
  std::string profile;
  for (const auto& v : values) {
    const MeanEstimate m = mean_estimate(v);
    mean.push_back(m.mean);
    se.push_back(m.std_error);
    profile += fmt(m.mean) + " ";
  }
  const ParabolaFit fit = parabola_fit(ns, mean, se);
  out.check(fit.lambda_hat >= 0.3 * c.lambda && fit.lambda_hat <= 3.0 * c.lambda,
            "lambda_hat " + fmt(fit.lambda_hat) + " +- " + fmt(fit.lambda_se) + " in [" + fmt(0.3 * c.lambda) + ", " +
                fmt(3.0 * c.lambda) + "] (lambda " + fmt(c.lambda) + "); profile " + profile);
  return out;
}

// ---------------------------------------------------------------------------

int run_cli(const std::filesystem::path& cwd, const std::string& args) {
  std::filesystem::create_directories(cwd);
  const std::string cmd = "cd '" + cwd.string() + "' && '" LGLE_CLI_PATH "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("lgle_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"polymer", "polymer --theta 1 --n 8 --k 2 --samples 16 --n-mc 100 --seed 9"},
      {"bridge", "bridge --t 10 --x=0.3 --y=7.1 --samples 40 --seed 9"},
      {"bridge-mcmc", "bridge --t 10 --x=0.3 --y=7.1 --samples 40 --sweeps 20 --seed 9"},
      {"ensemble", "ensemble --k 2 --t 8 --x=0,-2 --y=1,-1 --z=-inf --samples 40 --seed 9"},
      {"ensemble-mcmc", "ensemble --k 2 --t 8 --x=0,-2 --y=1,-1 --z=-4 --samples 40 --sweeps 20 --seed 9"},
      {"couple", "couple --k 2 --t 5 --x=0.5,-1 --y=1,-0.5 --z=-3 --shift 0.5 --samples 12 --seed 9"},
  };
  for (const auto& [name, args] : commands) {
    std::vector<std::string> csv, json;
    bool ran = true;
    int run = 0;
    for (int workers : {1, 4, 1, 4}) {
      const fs::path dir = root / name / std::to_string(run++);
      ran = ran && run_cli(dir, args + " --workers " + std::to_string(workers) + " --out run") == 0;
      csv.push_back(slurp(dir / "run.csv"));
      json.push_back(slurp(dir / "run.json"));
    }
    bool same = ran && !csv[0].empty() && !json[0].empty();
    for (std::size_t r = 1; r < csv.size(); ++r) same = same && csv[r] == csv[0] && json[r] == json[0];
    out.check(same, name + ": files bit-identical across 2 runs x workers {1,4}");
  }
  {
    bool ran = true;
    std::vector<std::string> stats;
    int run = 0;
    for (int workers : {1, 4}) {
      const fs::path dir = root / "stats" / std::to_string(run++);
      ran = ran && run_cli(dir, "polymer --n 8 --k 2 --samples 10 --n-mc 100 --seed 9 --out p") == 0;
      ran = ran && run_cli(dir, "stats --in p.csv --workers " + std::to_string(workers) + " --out run") == 0;
      stats.push_back(slurp(dir / "run.csv") + slurp(dir / "run.json"));
    }
    out.check(ran && !stats[0].empty() && stats[0] == stats[1], "stats: files bit-identical across workers {1,4}");
  }
  fs::remove_all(root);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "polymer oracle triangle", polymer_oracle_triangle},
      {2, "special functions", special_functions},
      {3, "bridge correctness", bridge_correctness},
      {4, "Gibbs measure", gibbs_measure},
      {5, "grand monotone coupling", grand_coupling},
      {6, "KPZ fluctuation check", kpz_fluctuations},
      {7, "parabolic profile", parabolic_profile},
      {8, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << ", " << fmt(secs)
              << " s)\n";
    for (const auto& note : o.notes) std::cout << "      " << note << '\n';
    std::cout.flush();
    if (!o.pass) ++failed;
  }
  std::cout << (failed == 0 ? "ALL CRITERIA PASS" : std::to_string(failed) + " CRITERIA FAILED") << '\n';
  return failed == 0 ? 0 : 1;
}
