#pragma once

// Random walk bridges with increment density G = exp(-H^RW): tabulated
// increment laws, n-step densities by FFT convolution, and two samplers
// (sequential conditional sampling, single-site Gibbs).

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "lgle/errors.hpp"
#include "lgle/grid_density.hpp"
#include "lgle/rng.hpp"
#include "lgle/special_functions.hpp"

namespace lgle {

enum class HrwKind { LogGamma, GaussianTest, Tabulated };

// Increment law of the walk. LogGamma has H^RW(x) = theta x + e^{-x} + log Gamma(theta),
// the law of -log of a Gamma(theta, 1) variable.
class HrwSpec {
 public:
  static HrwSpec log_gamma(double theta) {
    HrwSpec s;
    s.kind_ = HrwKind::LogGamma;
    s.param_ = ThetaParam(theta).value;
    s.log_norm_ = lgle::log_gamma(theta);
    s.validate();
    return s;
  }

  static HrwSpec gaussian_test(double sigma = 1.0) {
    detail::require(sigma > 0.0, "HrwSpec: sigma must be positive");
    HrwSpec s;
    s.kind_ = HrwKind::GaussianTest;
    s.param_ = sigma;
    s.log_norm_ = std::log(sigma) + 0.5 * std::log(2.0 * std::numbers::pi);
    s.validate();
    return s;
  }

  // G given by nonnegative values on a uniform grid, interpolated linearly
  // between nodes and zero outside [lo, hi]. Normalised here.
  static HrwSpec tabulated(double lo, double hi, std::vector<double> g_values) {
    detail::require(g_values.size() >= 3 && hi > lo, "HrwSpec: tabulated law needs >= 3 nodes");
    HrwSpec s;
    s.kind_ = HrwKind::Tabulated;
    s.tab_lo_ = lo;
    s.tab_step_ = (hi - lo) / static_cast<double>(g_values.size() - 1);
    GridDensity gd(lo, hi, g_values);
    for (double v : g_values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("HrwSpec: tabulated values must be finite and >= 0");
    const double mass = gd.raw_mass();
    if (!(mass > 0.0)) throw DomainError("HrwSpec: tabulated law is not normalizable");
    for (auto& v : g_values) v /= mass;
    s.tab_ = std::move(g_values);
    s.validate();
    return s;
  }

  HrwKind kind() const { return kind_; }
  double theta() const { return param_; }

  // log G(x) = -H^RW(x).
  double log_density(double x) const {
    switch (kind_) {
      case HrwKind::LogGamma:
        return -param_ * x - std::exp(-x) - log_norm_;
      case HrwKind::GaussianTest:
        return -0.5 * (x / param_) * (x / param_) - log_norm_;
      case HrwKind::Tabulated:
        return std::log(density(x));
    }
    return 0.0;
  }
  double density(double x) const {
    if (kind_ != HrwKind::Tabulated) return std::exp(log_density(x));
    const double pos = (x - tab_lo_) / tab_step_;
    const double last = static_cast<double>(tab_.size() - 1);
    if (!(pos >= 0.0 && pos <= last)) return 0.0;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), tab_.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * tab_[i] + w * tab_[i + 1];
  }

  double mean() const { return mean_; }
  double variance() const { return var_; }
  // Interval carrying all but ~1e-12 of the mass (symmetric about the mean).
  double truncation_halfwidth() const { return halfwidth_; }

 private:
  HrwSpec() = default;

  // Checks normalisation by quadrature and records mean, variance and the
  // 1e-12 truncation half-width.
  void validate() {
    double guess_mu = 0.0, guess_sd = 1.0;
    if (kind_ == HrwKind::LogGamma) {
      guess_mu = -digamma(param_);
      guess_sd = std::sqrt(trigamma(param_));
    } else if (kind_ == HrwKind::GaussianTest) {
      guess_sd = param_;
    } else {
      guess_mu = tab_lo_ + 0.5 * tab_step_ * static_cast<double>(tab_.size() - 1);
      guess_sd = tab_step_ * static_cast<double>(tab_.size());
    }
    // Walk outwards until log G is negligible on both sides.
    const double stride = 0.25 * guess_sd;
    double left = guess_mu, right = guess_mu;
    const double floor = -80.0;
    for (int it = 0; it < 100000 && !(log_density(left) < floor && left < guess_mu - guess_sd); ++it) left -= stride;
    for (int it = 0; it < 100000 && !(log_density(right) < floor && right > guess_mu + guess_sd); ++it) right += stride;
    if (kind_ == HrwKind::Tabulated) {
      left = std::min(left, tab_lo_);
      right = std::max(right, tab_lo_ + tab_step_ * static_cast<double>(tab_.size() - 1));
    }
    const int n = 200001;
    const double h = (right - left) / (n - 1);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = density(left + i * h);
    GridDensity gd(left, right, g);
    const double mass = gd.raw_mass();
    if (!(std::abs(mass - 1.0) <= 1e-6)) throw DomainError("HrwSpec: density does not integrate to 1");
    mean_ = gd.mean();
    var_ = gd.variance();
    std::vector<double> cum;
    const double total = detail::cumulative_trapezoid(g, cum);
    const double tol = 1e-12 * total;
    const double sd = std::sqrt(var_);
    double w = 0.5 * sd;
    auto tail_mass = [&](double width) {
      auto cdf_at = [&](double t) {
        if (t <= left) return 0.0;
        if (t >= right) return total;
        const double pos = (t - left) / h;
        const std::size_t i = std::min(static_cast<std::size_t>(pos), cum.size() - 2);
        const double f = pos - static_cast<double>(i);
        return (1.0 - f) * cum[i] + f * cum[i + 1];
      };
      return cdf_at(mean_ - width) + (total - cdf_at(mean_ + width));
    };
    while (tail_mass(w) > tol && w < right - left) w += 0.5 * sd;
    halfwidth_ = w;
  }

  HrwKind kind_ = HrwKind::LogGamma;
  double param_ = 1.0;
  double log_norm_ = 0.0;
  double tab_lo_ = 0.0;
  double tab_step_ = 1.0;
  std::vector<double> tab_;
  double mean_ = 0.0;
  double var_ = 1.0;
  double halfwidth_ = 1.0;
};

inline constexpr int kDefaultGridPoints = 4096;

// G tabulated on [mu - W, mu + W] with W = max(1e-12 truncation width, 12 sd);
// normalised so the trapezoid mass is one.
inline GridDensity hrw_density(const HrwSpec& hrw, int m = kDefaultGridPoints) {
  detail::require(m >= 16, "hrw_density: need at least 16 grid points");
  const double mu = hrw.mean();
  const double w = std::max(hrw.truncation_halfwidth(), 12.0 * std::sqrt(hrw.variance()));
  const double lo = mu - w, hi = mu + w;
  std::vector<double> v(static_cast<std::size_t>(m));
  const double h = (hi - lo) / (m - 1);
  for (int i = 0; i < m; ++i) v[i] = hrw.density(lo + i * h);
  GridDensity g(lo, hi, std::move(v));
  g.normalize();
  return g;
}

inline constexpr double kDefaultMaxGridWidth = 1e4;

// Density of the sum of n increments, by repeated FFT convolution on the
// increment spacing.
inline GridDensity n_step_density(const GridDensity& g, int n, double max_width = kDefaultMaxGridWidth) {
  detail::require(n >= 1, "n_step_density: n must be >= 1");
  GridDensity acc = g;
  for (int s = 2; s <= n; ++s) {
    acc = convolve(acc, g);
    if (acc.hi - acc.lo > max_width) throw ResourceError("n_step_density: support exceeds configured maximum width");
  }
  return acc;
}

// log-gamma increments at theta = 1, built once.
inline const HrwSpec& default_hrw() {
  static const HrwSpec h = HrwSpec::log_gamma(1.0);
  return h;
}

struct BridgeSpec {
  int T0 = 0;
  int T1 = 1;
  double x = 0.0;
  double y = 0.0;
  HrwSpec hrw = default_hrw();

  void validate() const { detail::require(T0 < T1, "BridgeSpec: need T0 < T1"); }
};

// Immutable tables shared by bridge samplers: the increment density and the
// n-step densities G_1..G_max_steps.
class BridgeLaw {
 public:
  BridgeLaw(const HrwSpec& hrw, int max_steps, int m = kDefaultGridPoints) : hrw_(hrw) {
    detail::require(max_steps >= 1, "BridgeLaw: max_steps must be >= 1");
    increment_ = hrw_density(hrw, m);
    steps_.push_back(increment_);
    for (int s = 2; s <= max_steps; ++s) {
      steps_.push_back(convolve(steps_.back(), increment_));
      if (steps_.back().hi - steps_.back().lo > kDefaultMaxGridWidth)
        throw ResourceError("BridgeLaw: support exceeds configured maximum width");
    }
    // Node range where G is not negligible; conditional grids use only these.
    const double peak = *std::max_element(increment_.values.begin(), increment_.values.end());
    support_lo_ = 0;
    support_hi_ = increment_.m() - 1;
    while (support_lo_ < support_hi_ && increment_.values[support_lo_] < 1e-30 * peak) ++support_lo_;
    while (support_hi_ > support_lo_ && increment_.values[support_hi_] < 1e-30 * peak) --support_hi_;
  }

  const HrwSpec& hrw() const { return hrw_; }
  const GridDensity& increment() const { return increment_; }
  int max_steps() const { return static_cast<int>(steps_.size()); }
  const GridDensity& steps(int n) const {
    if (n < 1 || n > max_steps()) throw DomainError("BridgeLaw: step count out of range");
    return steps_[static_cast<std::size_t>(n - 1)];
  }
  int support_lo() const { return support_lo_; }
  int support_hi() const { return support_hi_; }

 private:
  HrwSpec hrw_;
  GridDensity increment_;
  std::vector<GridDensity> steps_;
  int support_lo_ = 0;
  int support_hi_ = 0;
};

namespace detail {

struct BridgeScratch {
  std::vector<double> weights;
  std::vector<double> cum;
};

inline BridgeScratch& bridge_scratch() {
  thread_local BridgeScratch s;
  return s;
}

}  // namespace detail

// Path values at T0..T1 with both endpoints pinned. Each interior value is
// drawn from the density proportional to G(u - previous) G_{T1-m}(y - u).
inline std::vector<double> sample_bridge_sequential(const BridgeLaw& law, const BridgeSpec& spec, Rng& rng) {
  spec.validate();
  const int T = spec.T1 - spec.T0;
  if (T - 1 > law.max_steps()) throw DomainError("sample_bridge_sequential: bridge longer than the prepared law");
  std::vector<double> path(static_cast<std::size_t>(T + 1));
  path.front() = spec.x;
  path.back() = spec.y;
  const GridDensity& inc = law.increment();
  const double h = inc.step();
  const int i0 = law.support_lo(), i1 = law.support_hi();
  auto& scratch = detail::bridge_scratch();
  const std::size_t count = static_cast<std::size_t>(i1 - i0 + 1);
  scratch.weights.resize(count);
  for (int m = 1; m < T; ++m) {
    const double base = path[m - 1] + inc.x(i0);
    detail::reversed_samples(law.steps(T - m), spec.y - base, scratch.weights);
    for (std::size_t i = 0; i < count; ++i) scratch.weights[i] *= inc.values[i0 + i];
    path[m] = sample_from_weights(scratch.weights, base, h, uniform_open(rng), scratch.cum);
  }
  return path;
}

inline std::vector<double> sample_bridge_sequential(const BridgeSpec& spec, Rng& rng) {
  spec.validate();
  const BridgeLaw law(spec.hrw, std::max(1, spec.T1 - spec.T0 - 1));
  return sample_bridge_sequential(law, spec, rng);
}

// Resample interior point `m` of `path` from its exact conditional given its
// neighbours, proportional to G(u - left) G(right - u).
inline void bridge_site_update(const BridgeLaw& law, std::span<double> path, std::size_t m, Rng& rng) {
  const GridDensity& inc = law.increment();
  const double h = inc.step();
  const int i0 = law.support_lo(), i1 = law.support_hi();
  const double left = path[m - 1], right = path[m + 1];
  // Restrict to nodes where both factors can be non-negligible.
  const double lo_u = std::max(left + inc.x(i0), right - inc.x(i1));
  const double hi_u = std::min(left + inc.x(i1), right - inc.x(i0));
  int a = i0, b = i1;
  if (hi_u >= lo_u) {
    a = std::max(i0, static_cast<int>(std::floor((lo_u - left - inc.lo) / h)) - 1);
    b = std::min(i1, static_cast<int>(std::ceil((hi_u - left - inc.lo) / h)) + 1);
  }
  auto& scratch = detail::bridge_scratch();
  const std::size_t count = static_cast<std::size_t>(b - a + 1);
  scratch.weights.resize(count);
  const double base = left + inc.x(a);
  detail::reversed_samples(inc, right - base, scratch.weights);
  for (std::size_t i = 0; i < count; ++i) scratch.weights[i] *= inc.values[a + i];
  path[m] = sample_from_weights(scratch.weights, base, h, uniform_open(rng), scratch.cum);
}

// Systematic-scan single-site Gibbs sampler. Starts from `init` when given,
// otherwise from the straight line between the endpoints.
inline std::vector<double> sample_bridge_mcmc(const BridgeLaw& law, const BridgeSpec& spec, int sweeps, Rng& rng,
                                              std::span<const double> init = {}) {
  spec.validate();
  detail::require(sweeps >= 1, "sample_bridge_mcmc: sweeps must be >= 1");
  const int T = spec.T1 - spec.T0;
  std::vector<double> path(static_cast<std::size_t>(T + 1));
  if (!init.empty()) {
    detail::require(init.size() == path.size(), "sample_bridge_mcmc: initial path has wrong length");
    std::copy(init.begin(), init.end(), path.begin());
  } else {
    for (int m = 0; m <= T; ++m) path[m] = spec.x + (spec.y - spec.x) * m / T;
  }
  path.front() = spec.x;
  path.back() = spec.y;
  for (int s = 0; s < sweeps; ++s)
    for (int m = 1; m < T; ++m) bridge_site_update(law, path, static_cast<std::size_t>(m), rng);
  return path;
}

inline std::vector<double> sample_bridge_mcmc(const BridgeSpec& spec, int sweeps, Rng& rng) {
  const BridgeLaw law(spec.hrw, 1);
  return sample_bridge_mcmc(law, spec, sweeps, rng);
}

// Quadrature density of the bridge value at T0 + m, proportional to
// G_m(u - x) G_{T-m}(y - u), on the grid of G_m shifted by x.
inline GridDensity bridge_marginal_density(const BridgeLaw& law, const BridgeSpec& spec, int m) {
  const int T = spec.T1 - spec.T0;
  detail::require(m >= 1 && m < T, "bridge_marginal_density: need an interior time");
  const GridDensity& left = law.steps(m);
  const GridDensity& right = law.steps(T - m);
  std::vector<double> v(left.values.size());
  for (int i = 0; i < left.m(); ++i) v[i] = left.values[i] * right.value_at(spec.y - (spec.x + left.x(i)));
  GridDensity g(spec.x + left.lo, spec.x + left.hi, std::move(v));
  g.normalize();
  return g;
}

}  // namespace lgle
