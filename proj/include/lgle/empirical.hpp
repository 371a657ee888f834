#pragma once

// Sample summaries: empirical CDFs, the two-sample Kolmogorov-Smirnov
// distance, compensated means and named statistic reports.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgle/errors.hpp"

namespace lgle {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

inline MeanEstimate mean_estimate(std::span<const double> x) {
  detail::require(!x.empty(), "mean_estimate: empty sample");
  CompensatedSum s;
  for (double v : x) s.add(v);
  const double mean = s.value() / static_cast<double>(x.size());
  if (x.size() < 2) return {mean, 0.0, x.size()};
  CompensatedSum ss;
  for (double v : x) ss.add((v - mean) * (v - mean));
  const double var = ss.value() / static_cast<double>(x.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(x.size())), x.size()};
}

class EmpiricalCDF {
 public:
  explicit EmpiricalCDF(std::vector<double> samples) : x_(std::move(samples)) {
    detail::require(!x_.empty(), "EmpiricalCDF: need at least one sample");
    for (double v : x_)
      if (std::isnan(v)) throw DomainError("EmpiricalCDF: NaN sample");
    std::sort(x_.begin(), x_.end());
  }

  std::size_t count() const { return x_.size(); }
  const std::vector<double>& sorted() const { return x_; }

  // Fraction of samples <= t.
  double operator()(double t) const {
    return static_cast<double>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) / static_cast<double>(x_.size());
  }

  double quantile(double q) const {
    detail::require(q >= 0.0 && q <= 1.0, "EmpiricalCDF::quantile: q outside [0,1]");
    if (q == 0.0) return x_.front();
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(x_.size())));
    return x_[std::min(rank, x_.size()) - 1];
  }

  double mean() const { return mean_estimate(x_).mean; }

 private:
  std::vector<double> x_;
};

// sup_t |F_a(t) - F_b(t)|, evaluated exactly at every merged sample point.
inline double ks_distance(const EmpiricalCDF& a, const EmpiricalCDF& b) {
  const auto& xa = a.sorted();
  const auto& xb = b.sorted();
  const double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() || j < xb.size()) {
    double t;
    if (j == xb.size() || (i < xa.size() && xa[i] <= xb[j]))
      t = xa[i];
    else
      t = xb[j];
    while (i < xa.size() && xa[i] == t) ++i;
    while (j < xb.size() && xb[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Large-sample 1% critical value of the two-sample KS statistic.
inline double ks_critical_value_1pct(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 1.628 * std::sqrt((nn + mm) / (nn * mm));
}

struct Statistic {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
};

class StatReport {
 public:
  void add(std::string name, double value, double std_error = 0.0) {
    detail::require(!(std_error < 0.0), "StatReport: standard errors must be nonnegative");
    stats_.push_back({std::move(name), value, std_error});
  }

  const std::vector<Statistic>& stats() const { return stats_; }

  std::optional<Statistic> find(const std::string& name) const {
    for (const auto& s : stats_)
      if (s.name == name) return s;
    return std::nullopt;
  }

  double value(const std::string& name) const {
    const auto s = find(name);
    if (!s) throw DomainError("StatReport: no statistic named " + name);
    return s->value;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& s : stats_) out[s.name] = {{"value", s.value}, {"std_error", s.std_error}};
    return out;
  }

 private:
  std::vector<Statistic> stats_;
};

}  // namespace lgle
