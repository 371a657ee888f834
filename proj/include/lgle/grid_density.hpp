#pragma once

// Tabulated densities on uniform grids: the quadrature backbone shared by the
// bridge, Gibbs and coupling modules. Integrals are trapezoid sums; CDFs are
// cumulative trapezoid sums, and inverse CDFs interpolate linearly between
// grid nodes.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <span>
#include <vector>

#include "lgle/errors.hpp"

namespace lgle {

struct GridDensity {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> values;  // density is values[i] * exp(log_scale)
  double log_scale = 0.0;

  GridDensity() = default;
  GridDensity(double lo_, double hi_, std::vector<double> v, double log_scale_ = 0.0)
      : lo(lo_), hi(hi_), values(std::move(v)), log_scale(log_scale_) {
    detail::require(values.size() >= 2 && hi > lo, "GridDensity: need >= 2 points and hi > lo");
  }

  int m() const { return static_cast<int>(values.size()); }
  double step() const { return (hi - lo) / (m() - 1); }
  double x(int i) const { return lo + i * step(); }

  // Linear interpolation of the stored values; zero outside [lo, hi].
  double value_at(double t) const {
    if (!(t >= lo && t <= hi)) return 0.0;
    const double pos = (t - lo) / step();
    const int i = std::min(static_cast<int>(pos), m() - 2);
    const double w = pos - i;
    return (1.0 - w) * values[i] + w * values[i + 1];
  }

  // Trapezoid integral of the stored values (without log_scale).
  double raw_mass() const {
    double s = 0.5 * (values.front() + values.back());
    for (int i = 1; i + 1 < m(); ++i) s += values[i];
    return s * step();
  }
  double mass() const { return raw_mass() * std::exp(log_scale); }

  double moment(int order) const {
    double s = 0.0;
    for (int i = 0; i < m(); ++i) s += (i == 0 || i == m() - 1 ? 0.5 : 1.0) * values[i] * std::pow(x(i), order);
    return s * step() / raw_mass();
  }
  double mean() const { return moment(1); }
  double variance() const {
    const double mu = mean();
    double s = 0.0;
    for (int i = 0; i < m(); ++i) s += (i == 0 || i == m() - 1 ? 0.5 : 1.0) * values[i] * (x(i) - mu) * (x(i) - mu);
    return s * step() / raw_mass();
  }

  // Rescale so the trapezoid mass is exactly one (log_scale reset to 0).
  void normalize() {
    const double mass0 = raw_mass();
    if (!(mass0 > 0.0) || !std::isfinite(mass0)) throw DomainError("GridDensity: not normalizable");
    for (auto& v : values) v /= mass0;
    log_scale = 0.0;
  }

  // Normalised cumulative trapezoid sums at the nodes.
  std::vector<double> cdf() const;
};

namespace detail {

// Cumulative trapezoid sums of w (node spacing folded out), written to `cum`.
inline double cumulative_trapezoid(std::span<const double> w, std::vector<double>& cum) {
  cum.resize(w.size());
  double acc = 0.0;
  cum[0] = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    acc += 0.5 * (w[i - 1] + w[i]);
    cum[i] = acc;
  }
  return acc;
}

}  // namespace detail

inline std::vector<double> GridDensity::cdf() const {
  std::vector<double> cum;
  const double total = detail::cumulative_trapezoid(values, cum);
  if (!(total > 0.0)) throw PrecisionError("GridDensity::cdf: zero mass");
  for (auto& c : cum) c /= total;
  cum.back() = 1.0;
  for (std::size_t i = 1; i < cum.size(); ++i)
    if (cum[i] < cum[i - 1]) throw InternalError("GridDensity::cdf: non-monotone CDF (negative density entries)");
  return cum;
}

// Inverse of the piecewise-linear interpolant of normalised node CDF values.
inline double inverse_cdf(std::span<const double> cdf_nodes, double x0, double h, double u) {
  const auto it = std::lower_bound(cdf_nodes.begin(), cdf_nodes.end(), u);
  if (it == cdf_nodes.begin()) return x0;
  if (it == cdf_nodes.end()) return x0 + h * static_cast<double>(cdf_nodes.size() - 1);
  const std::size_t j = static_cast<std::size_t>(it - cdf_nodes.begin());
  const double c0 = cdf_nodes[j - 1], c1 = cdf_nodes[j];
  const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return x0 + h * (static_cast<double>(j - 1) + t);
}

// Draw from the density with unnormalised node weights w at x0 + i h by
// inverting the cumulative trapezoid CDF at u. `scratch` avoids allocation.
inline double sample_from_weights(std::span<const double> w, double x0, double h, double u,
                                  std::vector<double>& scratch) {
  const double total = detail::cumulative_trapezoid(w, scratch);
  if (!(total > 0.0) || !std::isfinite(total))
    throw PrecisionError("conditional density numerically zero on grid");
  const double target = u * total;
  const auto it = std::lower_bound(scratch.begin(), scratch.end(), target);
  if (it == scratch.begin()) return x0;
  if (it == scratch.end()) return x0 + h * static_cast<double>(w.size() - 1);
  const std::size_t j = static_cast<std::size_t>(it - scratch.begin());
  const double c0 = scratch[j - 1], c1 = scratch[j];
  const double t = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
  return x0 + h * (static_cast<double>(j - 1) + t);
}

namespace detail {

// out[i] = g.value_at(t0 - i * g.step()): the interpolation weight is shared
// by every node, so one pass suffices.
inline void reversed_samples(const GridDensity& g, double t0, std::span<double> out) {
  const double pos0 = (t0 - g.lo) / g.step();
  const double fl = std::floor(pos0);
  const double frac = pos0 - fl;
  const long last = g.m() - 1;
  long idx = static_cast<long>(fl);
  const double* v = g.values.data();
  for (std::size_t i = 0; i < out.size(); ++i, --idx) {
    if (idx >= 0 && idx < last)
      out[i] = (1.0 - frac) * v[idx] + frac * v[idx + 1];
    else
      out[i] = (idx == last && frac == 0.0) ? v[last] : 0.0;
  }
}

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Linear convolution of two real sequences via FFTW.
inline std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  const std::size_t nc = n / 2 + 1;
  double* in = fftw_alloc_real(n);
  fftw_complex* fa = fftw_alloc_complex(nc);
  fftw_complex* fb = fftw_alloc_complex(nc);
  fftw_plan fwd_a, fwd_b, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, fa, FFTW_ESTIMATE);
    fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, fb, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa, in, FFTW_ESTIMATE);
  }
  std::fill(in, in + n, 0.0);
  std::copy(a.begin(), a.end(), in);
  fftw_execute(fwd_a);
  std::fill(in, in + n, 0.0);
  std::copy(b.begin(), b.end(), in);
  fftw_execute(fwd_b);
  for (std::size_t i = 0; i < nc; ++i) {
    const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
    const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
    fa[i][0] = re;
    fa[i][1] = im;
  }
  fftw_execute(inv);
  std::vector<double> out(in, in + out_len);
  for (auto& v : out) v = std::max(0.0, v / static_cast<double>(n));
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_a);
    fftw_destroy_plan(fwd_b);
    fftw_destroy_plan(inv);
  }
  fftw_free(in);
  fftw_free(fa);
  fftw_free(fb);
  return out;
}

}  // namespace detail

// Density of X + Y for independent X ~ a, Y ~ b on grids of equal spacing.
// Tails carrying less than `trim` of the mass are dropped.
inline GridDensity convolve(const GridDensity& a, const GridDensity& b, double trim = 1e-16) {
  const double h = a.step();
  if (std::abs(b.step() - h) > 1e-9 * h) throw DomainError("convolve: grids must share their spacing");
  std::vector<double> c = detail::fft_convolve(a.values, b.values);
  for (auto& v : c) v *= h;
  // Floor FFT round-off relative to the peak.
  const double peak = *std::max_element(c.begin(), c.end());
  for (auto& v : c)
    if (v < 1e-300 || v < 1e-18 * peak) v = 0.0;
  std::vector<double> cum;
  const double total = detail::cumulative_trapezoid(c, cum);
  std::size_t first = 0, last = c.size() - 1;
  while (first + 2 < last && cum[first + 1] < trim * total) ++first;
  while (last > first + 2 && total - cum[last - 1] < trim * total) --last;
  std::vector<double> kept(c.begin() + static_cast<std::ptrdiff_t>(first), c.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  const double lo = a.lo + b.lo + static_cast<double>(first) * h;
  const double hi = lo + static_cast<double>(kept.size() - 1) * h;
  return {lo, hi, std::move(kept), a.log_scale + b.log_scale};
}

}  // namespace lgle
