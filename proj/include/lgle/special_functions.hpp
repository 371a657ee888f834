#pragma once

// Digamma-family functions and the log-gamma polymer scaling constants.
//
// Psi, Psi' and Psi'' are evaluated from their defining series
//
//   Psi(z)   = -gamma_E + sum_{n>=0} [1/(n+1) - 1/(n+z)]
//   Psi'(z)  =  sum_{n>=0} 1/(n+z)^2
//   Psi''(z) = -2 sum_{n>=0} 1/(n+z)^3
//
// by summing the first kDirectTerms terms exactly and closing the remainder
// with an Euler-Maclaurin tail (integral + half term + Bernoulli corrections).

#include <array>
#include <cmath>
#include <numbers>

#include "lgle/errors.hpp"

namespace lgle {

struct ThetaParam {
  double value = 1.0;

  explicit ThetaParam(double theta = 1.0) : value(theta) {
    detail::require(std::isfinite(theta) && theta > 0.0, "theta must be positive");
  }
};

struct ScalingConstants {
  double theta = 1.0;
  double alpha = 2.0 / 3.0;
  double p = 0.0;          // global slope, -h'_theta(1)
  double lambda = 0.0;     // curvature, h''_theta(1) / 4
  double sigma_p = 0.0;    // sqrt(Psi'(theta/2))
  double d_theta_1 = 0.0;  // Tracy-Widom scale d_theta(1)
  double h_theta_1 = 0.0;  // centering h_theta(1)
  double psi_coeff = 0.5;  // window psi(N) = psi_coeff * N^{1/3}

  double window(int N) const { return psi_coeff * std::cbrt(static_cast<double>(N)); }
};

namespace detail {

inline constexpr int kDirectTerms = 16;

// B_{2j} for j = 1..8.
inline constexpr std::array<double, 8> kBernoulliEven = {
    1.0 / 6.0,        -1.0 / 30.0,  1.0 / 42.0,      -1.0 / 30.0,
    5.0 / 66.0,       -691.0 / 2730.0, 7.0 / 6.0,   -3617.0 / 510.0};

// sum_{n>=K} (n+z)^{-s} for integer s >= 2, via Euler-Maclaurin at w = K+z.
inline double power_tail(double w, int s) {
  double sum = std::pow(w, 1 - s) / (s - 1) + 0.5 * std::pow(w, -s);
  // rising factorial (s)_{2j-1} / (2j)!
  double rising = s;           // (s)_1
  double factorial = 2.0;      // 2!
  double wpow = std::pow(w, -s - 1);
  const double w2 = 1.0 / (w * w);
  for (std::size_t j = 1; j <= kBernoulliEven.size(); ++j) {
    const double term = kBernoulliEven[j - 1] / factorial * rising * wpow;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    const double a = static_cast<double>(s + 2 * j - 1);
    rising *= a * (a + 1.0);
    factorial *= static_cast<double>((2 * j + 1) * (2 * j + 2));
    wpow *= w2;
  }
  return sum;
}

inline double check_positive(double z, const char* name) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError(std::string(name) + ": argument must be positive and finite");
  return z;
}

}  // namespace detail

inline double log_gamma(double x) {
  detail::check_positive(x, "log_gamma");
  return std::lgamma(x);
}

inline double digamma(double z) {
  detail::check_positive(z, "digamma");
  constexpr int K = detail::kDirectTerms;
  double sum = -std::numbers::egamma;
  for (int n = 0; n < K; ++n) sum += 1.0 / (n + 1.0) - 1.0 / (n + z);
  // Euler-Maclaurin for f(x) = 1/(x+1) - 1/(x+z) on [K, inf).
  const double a = K + 1.0;
  const double b = K + z;
  sum += std::log(b / a) + 0.5 * (1.0 / a - 1.0 / b);
  double pa = 1.0 / (a * a), pb = 1.0 / (b * b);
  const double a2 = pa, b2 = pb;
  for (std::size_t j = 1; j <= detail::kBernoulliEven.size(); ++j) {
    sum += detail::kBernoulliEven[j - 1] / (2.0 * j) * (pa - pb);
    pa *= a2;
    pb *= b2;
  }
  return sum;
}

// sum_{n>=0} (n+z)^{-s}, s >= 2 (Hurwitz zeta at integer order).
inline double hurwitz_zeta(int s, double z) {
  detail::check_positive(z, "hurwitz_zeta");
  detail::require(s >= 2, "hurwitz_zeta: order must be >= 2");
  constexpr int K = detail::kDirectTerms;
  double sum = 0.0;
  for (int n = 0; n < K; ++n) sum += std::pow(n + z, -s);
  return sum + detail::power_tail(K + z, s);
}

inline double trigamma(double z) {
  detail::check_positive(z, "trigamma");
  return hurwitz_zeta(2, z);
}

inline double tetragamma(double z) {
  detail::check_positive(z, "tetragamma");
  return -2.0 * hurwitz_zeta(3, z);
}

// Psi'(theta - z) / Psi'(z), a strictly increasing bijection (0,theta) -> (0,inf).
inline double g_theta(ThetaParam theta, double z) {
  if (!(z > 0.0 && z < theta.value)) throw DomainError("g_theta: z must lie in (0, theta)");
  return trigamma(theta.value - z) / trigamma(z);
}

inline double g_theta_inv(ThetaParam theta, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("g_theta_inv: x must be positive");
  double lo = 0.0, hi = theta.value;
  // Bisection on the open interval; stops when the bracket collapses to
  // adjacent doubles.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g_theta(theta, mid) < x)
      lo = mid;
    else
      hi = mid;
  }
  const double mid = 0.5 * (lo + hi);
  return (mid > 0.0 && mid < theta.value) ? mid : (lo > 0.0 ? lo : hi);
}

inline double h_theta(ThetaParam theta, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("h_theta: x must be positive");
  const double z = g_theta_inv(theta, x);
  return x * digamma(z) + digamma(theta.value - z);
}

// Derivative identity h'_theta(x) = Psi(g_theta^{-1}(x)).
inline double h_theta_prime(ThetaParam theta, double x) { return digamma(g_theta_inv(theta, x)); }

// Three-point central second difference of h_theta at x.
inline double h_theta_second_difference(ThetaParam theta, double x, double step) {
  detail::require(step > 0.0 && step < x, "h_theta_second_difference: bad step");
  return (h_theta(theta, x + step) - 2.0 * h_theta(theta, x) + h_theta(theta, x - step)) / (step * step);
}

inline constexpr double kCurvatureStep = 1e-4;

inline ScalingConstants scaling_constants(ThetaParam theta) {
  const double half = 0.5 * theta.value;
  ScalingConstants c;
  c.theta = theta.value;
  c.alpha = 2.0 / 3.0;
  c.p = -digamma(half);
  c.lambda = 0.25 * h_theta_second_difference(theta, 1.0, kCurvatureStep);
  if (!(c.lambda > 0.0)) throw InternalError("scaling_constants: curvature lambda is not positive");
  c.sigma_p = std::sqrt(trigamma(half));
  // Both series in d_theta(1) coincide because g^{-1}(1) = theta/2.
  c.d_theta_1 = std::cbrt(2.0 * hurwitz_zeta(3, half));
  c.h_theta_1 = 2.0 * digamma(half);
  c.psi_coeff = 0.5;
  return c;
}

}  // namespace lgle
