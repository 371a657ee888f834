#pragma once

// Statistical oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <utility>
#include <vector>

namespace test {

inline std::pair<double, double> mean_and_se(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

// sup |F_n - F| for a continuous reference CDF.
template <typename Cdf>
double ks_one_sample(std::vector<double> x, Cdf&& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Asymptotic Kolmogorov quantile c(alpha) = sqrt(-log(alpha/2)/2).
inline double kolmogorov_c(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

inline double ks_critical_one_sample(std::size_t n, double alpha) {
  return kolmogorov_c(alpha) / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return kolmogorov_c(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

inline double gamma_cdf(double shape, double x) { return x <= 0.0 ? 0.0 : boost::math::gamma_p(shape, x); }

}  // namespace test
