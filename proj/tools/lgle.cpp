#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lgle/errors.hpp"
#include "lgle/experiments.hpp"
#include "lgle/io.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitPrecision = 3;
constexpr int kExitResource = 4;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  if (s.empty()) return v;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, s.find(';') != std::string::npos ? ';' : ',')) v.push_back(lgle::parse_double(cell));
  return v;
}

// Values recorded in a stored polymer CSV become the defaults for `stats`
// unless the option was given explicitly.
void apply_stored_config(const lgle::CsvTable& t, lgle::RunConfig& cfg, const std::map<std::string, CLI::Option*>& opts) {
  auto given = [&](const std::string& key) { return opts.at(key)->count() > 0; };
  auto meta = [&](const std::string& key) { return t.find_meta(key); };
  if (const auto* cmd = meta("command"); cmd && *cmd != "polymer")
    throw lgle::DomainError("stats: input was produced by '" + *cmd + "', expected a polymer run");
  if (auto* v = meta("theta"); v && !given("theta")) cfg.theta = lgle::parse_double(*v);
  if (auto* v = meta("n"); v && !given("n")) cfg.N = std::stoi(*v);
  if (auto* v = meta("k"); v && !given("k")) cfg.k = std::stoi(*v);
  if (auto* v = meta("r"); v && !given("r")) cfg.r = lgle::parse_double(*v);
  if (auto* v = meta("seed"); v && !given("seed")) cfg.seed = std::stoull(*v);
  if (auto* v = meta("n_mc"); v && !given("n-mc")) cfg.n_mc = std::stoi(*v);
  if (auto* v = meta("tw_n"); v && !given("tw-n")) cfg.tw_n = lgle::parse_double(*v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-gamma line ensembles: polymer sampling, bridges, Gibbs ensembles, monotone coupling, statistics"};
  app.set_config("--config", "", "Flat key=value configuration file; command-line flags override it");
  app.require_subcommand(1, 1);
  app.fallthrough();

  lgle::RunConfig cfg;
  std::string x, y, z;
  std::map<std::string, CLI::Option*> opts;
  opts["theta"] = app.add_option("--theta", cfg.theta, "Inverse-gamma shape parameter theta > 0");
  opts["n"] = app.add_option("--n", cfg.N, "Polymer scale N (ensemble on [-N, N])");
  opts["k"] = app.add_option("--k", cfg.k, "Number of curves");
  opts["t"] = app.add_option("--t", cfg.T, "Number of lattice times 0..t-1 for bridge/ensemble/couple");
  opts["r"] = app.add_option("--r", cfg.r, "Window half-width in units of N^{2/3}");
  opts["samples"] = app.add_option("--samples", cfg.samples, "Number of independent samples or draws");
  opts["sweeps"] = app.add_option("--sweeps", cfg.sweeps, "MCMC sweeps per sample (0: exact sampling)");
  opts["grid"] = app.add_option("--grid", cfg.grid, "Grid resolution (0: module default)");
  opts["seed"] = app.add_option("--seed", cfg.seed, "Master seed (default 1)");
  opts["workers"] = app.add_option("--workers", cfg.workers, "Worker threads; never changes the output");
  opts["out"] = app.add_option("--out", cfg.out, "Output path prefix");
  opts["format"] = app.add_option("--format", cfg.format, "csv (data .csv + summary .json) or json (single .json)");
  opts["x"] = app.add_option("--x", x, "Entrance values, comma separated");
  opts["y"] = app.add_option("--y", y, "Exit values, comma separated");
  opts["z"] = app.add_option("--z", z, "Bottom boundary: one value or one per time; -inf allowed");
  opts["shift"] = app.add_option("--shift", cfg.shift, "couple: upper boundary = lower boundary + shift");
  opts["interaction"] = app.add_option("--interaction", cfg.interaction, "exp or zero");
  opts["n-mc"] = app.add_option("--n-mc", cfg.n_mc, "Monte Carlo size for acceptance estimates");
  opts["tw-n"] = app.add_option("--tw-n", cfg.tw_n, "Spatial location n of the Tracy-Widom statistic");
  opts["allow-k3"] = app.add_flag("--allow-k3", cfg.allow_k3, "couple: permit k = 3");
  opts["in"] = app.add_option("--in", cfg.in, "stats: stored polymer CSV");

  auto* polymer = app.add_subcommand("polymer", "Sample log-gamma polymer line ensembles and their statistics");
  auto* bridge = app.add_subcommand("bridge", "Sample log-gamma random walk bridges");
  auto* ensemble = app.add_subcommand("ensemble", "Sample Gibbs line ensembles by rejection or MCMC");
  auto* couple = app.add_subcommand("couple", "Run the monotone coupling for a boundary and its upward shift");
  auto* stats = app.add_subcommand("stats", "Recompute polymer statistics from a stored CSV");
  for (auto* sub : {polymer, bridge, ensemble, couple, stats}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    cfg.x = parse_list(x);
    cfg.y = parse_list(y);
    cfg.z = parse_list(z);
    lgle::RunOutput out;
    if (polymer->parsed()) {
      cfg.command = "polymer";
      out = lgle::run_polymer(cfg);
    } else if (bridge->parsed()) {
      cfg.command = "bridge";
      out = lgle::run_bridge(cfg);
    } else if (ensemble->parsed()) {
      cfg.command = "ensemble";
      out = lgle::run_ensemble(cfg);
    } else if (couple->parsed()) {
      cfg.command = "couple";
      out = lgle::run_couple(cfg);
    } else {
      cfg.command = "stats";
      if (cfg.in.empty()) throw lgle::DomainError("stats: --in is required");
      const lgle::CsvTable input = lgle::read_csv(cfg.in);
      apply_stored_config(input, cfg, opts);
      out = lgle::run_stats(cfg, input);
    }
    for (const auto& path : lgle::emit(cfg, out)) std::cout << path << '\n';
    return 0;
  } catch (const lgle::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lgle::PrecisionError& e) {
    std::cerr << "precision error: " << e.what() << '\n';
    return kExitPrecision;
  } catch (const lgle::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
