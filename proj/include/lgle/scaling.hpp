#pragma once

// KPZ 1/3 : 2/3 rescaling of polymer line ensembles and the diagnostics
// computed on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "lgle/empirical.hpp"
#include "lgle/errors.hpp"
#include "lgle/gibbs.hpp"
#include "lgle/line_ensemble.hpp"
#include "lgle/special_functions.hpp"

namespace lgle {

inline double kpz_time_scale(int N) { return std::pow(static_cast<double>(N), 2.0 / 3.0); }
inline double kpz_height_scale(int N) { return std::cbrt(static_cast<double>(N)); }

// f_i(s) = sigma_p^{-1} N^{-1/3} (L_i(s N^{2/3}) - p s N^{2/3}) on a grid of
// [-psi(N), psi(N)], held constant outside that window.
class ScaledEnsemble {
 public:
  ScaledEnsemble(const DiscreteLineEnsemble& L, const ScalingConstants& c, int N) : c_(c), N_(N) {
    detail::require(N >= 1, "kpz_scale: N must be >= 1");
    if (L.T0() > -N || L.T1() < N) throw DomainError("kpz_scale: ensemble must cover [-N, N]");
    detail::require(c.sigma_p > 0.0, "kpz_scale: sigma_p must be positive");
    first_ = L.first_curve();
    const double ts = kpz_time_scale(N), psi = c.window(N);
    const int jmax = static_cast<int>(std::floor(psi * ts + 1e-9));
    const bool ends = static_cast<double>(jmax) / ts < psi - 1e-12;
    std::vector<double> xs;  // lattice-scale times
    if (ends) xs.push_back(-psi * ts);
    for (int j = -jmax; j <= jmax; ++j) xs.push_back(j);
    if (ends) xs.push_back(psi * ts);
    for (double x : xs) times_.push_back(x / ts);
    for (int i = L.first_curve(); i <= L.last_curve(); ++i) {
      std::vector<double> f;
      f.reserve(times_.size());
      for (std::size_t j = 0; j < xs.size(); ++j) f.push_back(scale_value(L.eval(i, xs[j]), times_[j]));
      values_.push_back(std::move(f));
    }
  }

  int N() const { return N_; }
  const ScalingConstants& constants() const { return c_; }
  int first_curve() const { return first_; }
  int curves() const { return static_cast<int>(values_.size()); }
  double psi() const { return c_.window(N_); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& curve(int i) const { return values_.at(static_cast<std::size_t>(i - first_)); }

  // f_i(s) with linear interpolation and constant extension beyond +-psi.
  double eval(int i, double s) const {
    const auto& f = curve(i);
    s = std::clamp(s, times_.front(), times_.back());
    const auto it = std::upper_bound(times_.begin(), times_.end(), s);
    if (it == times_.end()) return f.back();
    const auto j = static_cast<std::size_t>(it - times_.begin());
    if (j == 0) return f.front();
    const double w = (s - times_[j - 1]) / (times_[j] - times_[j - 1]);
    return (1.0 - w) * f[j - 1] + w * f[j];
  }

  double scale_value(double l, double s) const {
    const double ts = kpz_time_scale(N_);
    return (l - c_.p * s * ts) / (c_.sigma_p * kpz_height_scale(N_));
  }

  // Inverse of scale_value: the ensemble value at lattice time s N^{2/3}.
  double unscale(double f, double s) const {
    return c_.sigma_p * kpz_height_scale(N_) * f + c_.p * s * kpz_time_scale(N_);
  }

 private:
  ScalingConstants c_;
  int N_;
  int first_ = 1;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

inline ScaledEnsemble kpz_scale(const DiscreteLineEnsemble& L, const ScalingConstants& c, int N) { return {L, c, N}; }

namespace detail {

// floor(v) that absorbs rounding in N^{2/3}, e.g. pow(8, 2/3) = 3.9999999999999996.
inline int lattice_floor(double v) { return static_cast<int>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v)))); }

inline int tw_lattice_time(int N, double n) { return lattice_floor(n * kpz_time_scale(N)); }

inline double tw_normalise(double top, const ScalingConstants& c, int N, double n) {
  const double drift = -c.p * n * kpz_time_scale(N);  // h'_theta(1) = -p
  const double curvature = c.lambda * n * n * kpz_height_scale(N);
  return (top + drift + curvature) / (std::cbrt(2.0 * N) * c.d_theta_1);
}

}  // namespace detail

// (L_1(floor(n N^{2/3})) + h'(1) n N^{2/3} + lambda n^2 N^{1/3}) / ((2N)^{1/3} d_theta(1)).
inline double tw_statistic(const DiscreteLineEnsemble& L, const ScalingConstants& c, int N, double n) {
  const int x = detail::tw_lattice_time(N, n);
  if (x < L.T0() || x > L.T1()) throw DomainError("tw_statistic: floor(n N^{2/3}) outside the ensemble");
  return detail::tw_normalise(L.at(L.first_curve(), x), c, N, n);
}

// Same statistic from the uncentred log partition function log Z(2N + x, 2N).
inline double tw_statistic_from_log_partition(double log_z, const ScalingConstants& c, int N, double n) {
  return detail::tw_normalise(log_z + 2.0 * N * c.h_theta_1, c, N, n);
}

// sup |f(x) - f(y)| over grid pairs with |x - y| <= delta.
inline double modulus_of_continuity(std::span<const double> times, std::span<const double> f, double delta) {
  detail::require(times.size() == f.size() && times.size() >= 2, "modulus_of_continuity: need matching grids");
  const double range = times.back() - times.front();
  if (!(delta > 0.0) || delta > range * (1.0 + 1e-12))
    throw DomainError("modulus_of_continuity: need 0 < delta <= b - a");
  const double tol = 1e-12 * range;
  double w = 0.0;
  for (std::size_t a = 0; a < times.size(); ++a)
    for (std::size_t b = a + 1; b < times.size() && times[b] - times[a] <= delta + tol; ++b)
      w = std::max(w, std::abs(f[b] - f[a]));
  return w;
}

inline double modulus_of_continuity(const ScaledEnsemble& f, int i, double delta) {
  return modulus_of_continuity(f.times(), f.curve(i), delta);
}

struct WindowExtrema {
  double sup = 0.0;
  double inf = 0.0;
};

// Extrema of L_k(x) - p x over [-r N^{2/3}, r N^{2/3}] for the interpolated
// curve; attained at lattice points or at the window ends.
inline WindowExtrema window_extrema(const DiscreteLineEnsemble& L, const ScalingConstants& c, int N, double r, int k) {
  detail::require(r > 0.0, "window_extrema: r must be positive");
  detail::require(k >= L.first_curve() && k <= L.last_curve(), "window_extrema: curve index outside ensemble");
  const double half = r * kpz_time_scale(N);
  if (-half < L.T0() - 1e-9 || half > L.T1() + 1e-9) throw DomainError("window_extrema: window exceeds the ensemble");
  auto g = [&](double x) { return L.eval(k, x) - c.p * x; };
  const double end = std::min(half, static_cast<double>(std::min(-L.T0(), L.T1())));
  WindowExtrema e{std::max(g(-end), g(end)), std::min(g(-end), g(end))};
  for (int j = -detail::lattice_floor(end); j <= detail::lattice_floor(end); ++j) {
    const double v = g(j);
    e.sup = std::max(e.sup, v);
    e.inf = std::min(e.inf, v);
  }
  return e;
}

// Gaps between adjacent curves at s^- = floor(-r N^{2/3}) and
// s^+ = floor(r N^{2/3}), and the acceptance probability of the top k curves
// on [s^-, s^+] with L_{k+1} as the lower boundary and no upper boundary.
inline StatReport gap_and_acceptance_diagnostics(const DiscreteLineEnsemble& L, const ScalingConstants& c, int N,
                                                 double r, int k, int n_mc, Rng& rng) {
  detail::require(k >= 1 && r > 0.0, "gap_and_acceptance_diagnostics: need k >= 1 and r > 0");
  if (L.curves() < k + 1) throw DomainError("gap_and_acceptance_diagnostics: need k + 1 curves");
  const int sm = detail::lattice_floor(-r * kpz_time_scale(N));
  const int sp = detail::lattice_floor(r * kpz_time_scale(N));
  if (sm < L.T0() || sp > L.T1() || sp <= sm) throw DomainError("gap_and_acceptance_diagnostics: window exceeds the ensemble");
  const int top = L.first_curve();
  StatReport rep;
  auto min_gap = [&](int i_lo, int i_hi) {
    double g = kInf;
    for (int i = i_lo; i <= i_hi; ++i)
      for (int s : {sm, sp}) g = std::min(g, L.at(i, s) - L.at(i + 1, s));
    return g;
  };
  if (k >= 2) rep.add("min_gap", min_gap(top, top + k - 2));
  rep.add("min_gap_bottom", min_gap(top + k - 1, top + k - 1));

  EnsembleSpec spec;
  spec.k1 = top;
  spec.k2 = top + k - 1;
  spec.a = sm;
  spec.b = sp;
  spec.hrw = HrwSpec::log_gamma(c.theta);
  spec.interaction = InteractionSpec::uniform(Interaction::exp_kind(), sm, sp);
  for (int i = spec.k1; i <= spec.k2; ++i) {
    spec.x.push_back(L.at(i, sm));
    spec.y.push_back(L.at(i, sp));
  }
  spec.f.assign(static_cast<std::size_t>(sp - sm + 1), kInf);
  for (int s = sm; s <= sp; ++s) spec.g.push_back(L.at(top + k, s));
  const AcceptanceEstimate z = acceptance_probability(spec, n_mc, rng);
  rep.add("acceptance", z.estimate, z.std_error);
  rep.add("s_minus", sm);
  rep.add("s_plus", sp);
  return rep;
}

struct ParabolaFit {
  double lambda_hat = 0.0;
  double lambda_se = 0.0;
  double c = 0.0;
  double residual = 0.0;  // weighted residual sum of squares
};

// Weighted least squares of y(n) = -lambda n^2 + c. Weights are inverse
// variances; an empty `se` gives unit weights.
inline ParabolaFit parabola_fit(std::span<const double> n, std::span<const double> y, std::span<const double> se = {}) {
  if (n.size() < 5 || n.size() != y.size() || (!se.empty() && se.size() != n.size()))
    throw DomainError("parabola_fit: need >= 5 matching profile points");
  const auto m = static_cast<Eigen::Index>(n.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd Y(m), W(m);
  bool all_se_positive = !se.empty();
  for (double s : se) all_se_positive = all_se_positive && s > 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = -n[i] * n[i];
    X(i, 1) = 1.0;
    Y(i) = y[i];
    W(i) = all_se_positive ? 1.0 / (se[i] * se[i]) : 1.0;
  }
  const Eigen::Matrix2d A = X.transpose() * W.asDiagonal() * X;
  if (std::abs(A.determinant()) <= 1e-12 * A.cwiseAbs().maxCoeff() * A.cwiseAbs().maxCoeff())
    throw DomainError("parabola_fit: degenerate design");
  const Eigen::Vector2d beta = A.ldlt().solve(X.transpose() * W.asDiagonal() * Y);
  const Eigen::VectorXd r = Y - X * beta;
  ParabolaFit fit;
  fit.lambda_hat = beta(0);
  fit.c = beta(1);
  fit.residual = r.dot(W.asDiagonal() * r);
  const Eigen::Matrix2d cov = A.inverse();
  fit.lambda_se = all_se_positive ? std::sqrt(cov(0, 0))
                                  : std::sqrt(cov(0, 0) * fit.residual / std::max<double>(1.0, static_cast<double>(m - 2)));
  return fit;
}

}  // namespace lgle
