#pragma once

// Log-gamma polymer: inverse-gamma environments, multi-path partition
// functions tau_{k,l}(n) of non-intersecting up-right paths, their telescoping
// ratios z_{k,l}(n), and the discrete line ensemble built from them.
//
// Lattice convention: vertex (i, j) has column i >= 1 and row j >= 1. The
// r-th path of an l-tuple runs from (1, r) to (n, k + r - l).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "lgle/double_double.hpp"
#include "lgle/errors.hpp"
#include "lgle/line_ensemble.hpp"
#include "lgle/rng.hpp"
#include "lgle/special_functions.hpp"

namespace lgle {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class PrecisionMode { Double, DoubleDouble };

// Column-major table of log weights log d_{i,j}, i in [1, columns], j in [1, rows].
class WeightField {
 public:
  WeightField(int columns, int rows, double theta, std::uint64_t seed, std::vector<double> log_entries)
      : columns_(columns), rows_(rows), theta_(theta), seed_(seed), log_d_(std::move(log_entries)) {
    detail::require(columns >= 1 && rows >= 1, "WeightField: dimensions must be >= 1");
    detail::require(log_d_.size() == static_cast<std::size_t>(columns) * rows, "WeightField: size mismatch");
    for (double v : log_d_)
      detail::require(std::isfinite(v), "WeightField: entries must be strictly positive and finite");
  }

  // Field with every weight equal to `value`.
  static WeightField constant(int columns, int rows, double value) {
    detail::require(value > 0.0, "WeightField: entries must be positive");
    return {columns, rows, 0.0, 0, std::vector<double>(static_cast<std::size_t>(columns) * rows, std::log(value))};
  }

  int columns() const { return columns_; }
  int rows() const { return rows_; }
  double theta() const { return theta_; }
  std::uint64_t seed() const { return seed_; }

  double log_weight(int i, int j) const { return log_d_[index(i, j)]; }
  double weight(int i, int j) const { return std::exp(log_weight(i, j)); }

  WeightField with_weight(int i, int j, double value) const {
    detail::require(value > 0.0, "WeightField: entries must be positive");
    WeightField copy = *this;
    copy.log_d_[index(i, j)] = std::log(value);
    return copy;
  }

 private:
  std::size_t index(int i, int j) const {
    if (i < 1 || i > columns_ || j < 1 || j > rows_) throw DomainError("WeightField: index out of range");
    return static_cast<std::size_t>(i - 1) * rows_ + static_cast<std::size_t>(j - 1);
  }

  int columns_;
  int rows_;
  double theta_;
  std::uint64_t seed_;
  std::vector<double> log_d_;
};

// Density of the inverse-gamma law with shape theta.
inline double inverse_gamma_density(double theta, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp(-(theta + 1.0) * std::log(x) - 1.0 / x - log_gamma(theta));
}

// i.i.d. inverse-gamma weights, drawn as 1/G with G ~ Gamma(theta, 1).
inline WeightField sample_weight_field(ThetaParam theta, int columns, int rows, std::uint64_t seed) {
  detail::require(columns >= 1 && rows >= 1, "sample_weight_field: dimensions must be >= 1");
  Rng rng(seed);
  std::gamma_distribution<double> gamma(theta.value, 1.0);
  std::vector<double> log_d(static_cast<std::size_t>(columns) * rows);
  for (auto& v : log_d) {
    double g = gamma(rng);
    while (!(g > 0.0)) g = gamma(rng);
    v = -std::log(g);
  }
  return {columns, rows, theta.value, seed, std::move(log_d)};
}

// Dense (columns x rows) table of log-values, 1-based.
class LogMatrix {
 public:
  LogMatrix(int columns, int rows) : columns_(columns), rows_(rows), v_(static_cast<std::size_t>(columns) * rows, kNegInf) {}
  int columns() const { return columns_; }
  int rows() const { return rows_; }
  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i - 1) * rows_ + (j - 1)]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i - 1) * rows_ + (j - 1)]; }

 private:
  int columns_;
  int rows_;
  std::vector<double> v_;
};

namespace detail {

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace detail

// log Z(i, j) for single up-right paths from (1, start_row) to (i, j), for all
// i <= columns, j <= rows. Entries below start_row are -inf.
inline LogMatrix single_path_from(const WeightField& d, int start_row, int columns, int rows) {
  detail::require(columns >= 1 && columns <= d.columns(), "single_path_partition: n out of range");
  detail::require(rows >= 1 && rows <= d.rows(), "single_path_partition: k out of range");
  detail::require(start_row >= 1 && start_row <= rows, "single_path_partition: start row out of range");
  LogMatrix z(columns, rows);
  for (int i = 1; i <= columns; ++i) {
    for (int j = start_row; j <= rows; ++j) {
      double acc;
      if (i == 1 && j == start_row) {
        acc = 0.0;
      } else {
        const double left = i > 1 ? z(i - 1, j) : kNegInf;
        const double below = j > start_row ? z(i, j - 1) : kNegInf;
        acc = detail::log_add(left, below);
      }
      z(i, j) = acc + d.log_weight(i, j);
    }
  }
  return z;
}

// Z(i,j) = d_{i,j} (Z(i-1,j) + Z(i,j-1)), Z(1,1) = d_{1,1}; Z(n,k) = tau_{k,1}(n).
inline LogMatrix single_path_partition(const WeightField& d, int n, int k) { return single_path_from(d, 1, n, k); }

inline constexpr double kEnumerationGuard = 1e7;

namespace detail {

struct EnumPath {
  std::uint64_t mask;
  double log_weight;
};

inline void enumerate_paths(const WeightField& d, int i, int j, int end_i, int end_j, std::uint64_t mask, double lw,
                            int rows, std::vector<EnumPath>& out) {
  mask |= std::uint64_t{1} << ((i - 1) * rows + (j - 1));
  lw += d.log_weight(i, j);
  if (i == end_i && j == end_j) {
    out.push_back({mask, lw});
    return;
  }
  if (i < end_i) enumerate_paths(d, i + 1, j, end_i, end_j, mask, lw, rows, out);
  if (j < end_j) enumerate_paths(d, i, j + 1, end_i, end_j, mask, lw, rows, out);
}

inline double binomial(int n, int r) {
  double b = 1.0;
  for (int t = 1; t <= r; ++t) b = b * (n - r + t) / t;
  return b;
}

}  // namespace detail

// Exact tau_{k,l}(n) by enumerating every l-tuple of paths and keeping the
// vertex-disjoint ones. Oracle only; guarded at 1e7 candidate tuples.
inline double tau_bruteforce(const WeightField& d, int k, int l, int n) {
  detail::require(1 <= l && l <= k && k <= d.rows(), "tau_bruteforce: need 1 <= l <= k <= rows");
  detail::require(n >= 0 && n <= d.columns(), "tau_bruteforce: n out of range");
  if (n < l) return kNegInf;
  double candidates = 1.0;
  for (int r = 1; r <= l; ++r) candidates *= detail::binomial((n - 1) + (k - l), n - 1);
  if (candidates > kEnumerationGuard) throw ResourceError("tau_bruteforce: enumeration guard exceeded");
  detail::require(static_cast<long>(n) * k <= 64, "tau_bruteforce: lattice too large for enumeration");

  std::vector<std::vector<detail::EnumPath>> paths(static_cast<std::size_t>(l));
  double ref = 0.0;
  for (int r = 1; r <= l; ++r) {
    detail::enumerate_paths(d, 1, r, n, k + r - l, 0, 0.0, k, paths[r - 1]);
    double best = kNegInf;
    for (const auto& p : paths[r - 1]) best = std::max(best, p.log_weight);
    ref += best;
  }

  double sum = 0.0, comp = 0.0;
  auto recurse = [&](auto&& self, int r, std::uint64_t used, double lw) -> void {
    if (r == l) {
      const double term = std::exp(lw - ref);
      const double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
      return;
    }
    for (const auto& p : paths[r]) {
      if (p.mask & used) continue;
      self(self, r + 1, used | p.mask, lw + p.log_weight);
    }
  };
  recurse(recurse, 0, 0, 0.0);
  sum += comp;
  return sum > 0.0 ? std::log(sum) + ref : kNegInf;
}

namespace detail {

inline double abs(double x) { return std::abs(x); }
inline double log(double x) { return std::log(x); }

// log det of a matrix given by log-entries, with each row scaled by its
// maximum before elimination. Throws PrecisionError unless det > 0.
template <typename Real>
double log_det_positive(const std::vector<std::vector<double>>& log_entries) {
  const std::size_t l = log_entries.size();
  double log_scale = 0.0;
  std::vector<std::vector<Real>> a(l, std::vector<Real>(l));
  for (std::size_t r = 0; r < l; ++r) {
    double row_max = kNegInf;
    for (double v : log_entries[r]) row_max = std::max(row_max, v);
    if (row_max == kNegInf) throw PrecisionError("tau_lgv: zero row in path matrix");
    log_scale += row_max;
    for (std::size_t c = 0; c < l; ++c) a[r][c] = Real(std::exp(log_entries[r][c] - row_max));
  }
  int sign = 1;
  double log_abs = 0.0;
  for (std::size_t c = 0; c < l; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < l; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (!(abs(a[piv][c]) > Real(0.0))) throw PrecisionError("tau_lgv: singular path matrix");
    if (piv != c) {
      std::swap(a[piv], a[c]);
      sign = -sign;
    }
    const Real p = a[c][c];
    if (p < Real(0.0)) sign = -sign;
    log_abs += log(abs(p));
    for (std::size_t r = c + 1; r < l; ++r) {
      const Real f = a[r][c] / p;
      for (std::size_t cc = c + 1; cc < l; ++cc) a[r][cc] = a[r][cc] - f * a[c][cc];
    }
  }
  if (sign <= 0) throw PrecisionError("tau_lgv: determinant not positive; escalate precision");
  return log_scale + log_abs;
}

inline double lgv_from_rows(const std::vector<LogMatrix>& from_start, int k, int l, int n, PrecisionMode mode) {
  if (n < l) return kNegInf;
  if (l == 1) return from_start[0](n, k);
  std::vector<std::vector<double>> m(static_cast<std::size_t>(l), std::vector<double>(static_cast<std::size_t>(l)));
  for (int r = 1; r <= l; ++r)
    for (int c = 1; c <= l; ++c) m[r - 1][c - 1] = from_start[r - 1](n, k - l + c);
  return mode == PrecisionMode::DoubleDouble ? log_det_positive<DoubleDouble>(m) : log_det_positive<double>(m);
}

}  // namespace detail

// tau_{k,l}(n) as the Lindstrom-Gessel-Viennot determinant of single-path
// partition functions between the start points (1, r) and end points (n, k-l+c).
inline double tau_lgv(const WeightField& d, int k, int l, int n, PrecisionMode mode = PrecisionMode::DoubleDouble) {
  detail::require(1 <= l && l <= k && k <= d.rows(), "tau_lgv: need 1 <= l <= k <= rows");
  detail::require(n >= 0 && n <= d.columns(), "tau_lgv: n out of range");
  if (n < l) return kNegInf;
  std::vector<LogMatrix> rows;
  for (int r = 1; r <= l; ++r) rows.push_back(single_path_from(d, r, n, k));
  return detail::lgv_from_rows(rows, k, l, n, mode);
}

// log tau_{k,l}(n) for k in [k_lo, k_hi], l in [1, min(k, l_max)], n in [0, n_max].
class PartitionTable {
 public:
  PartitionTable(int k_lo, int k_hi, int l_max, int n_max, PrecisionMode mode)
      : k_lo_(k_lo), k_hi_(k_hi), l_max_(l_max), n_max_(n_max), mode_(mode),
        v_(static_cast<std::size_t>(k_hi - k_lo + 1) * l_max * (n_max + 1), kNegInf) {}

  int k_lo() const { return k_lo_; }
  int k_hi() const { return k_hi_; }
  int l_max() const { return l_max_; }
  int n_max() const { return n_max_; }
  PrecisionMode precision_mode() const { return mode_; }

  bool contains(int k, int l, int n) const {
    return k >= k_lo_ && k <= k_hi_ && l >= 1 && l <= std::min(k, l_max_) && n >= 0 && n <= n_max_;
  }

  double log_tau(int k, int l, int n) const {
    if (!contains(k, l, n)) throw DomainError("PartitionTable: (k, l, n) outside table");
    return v_[index(k, l, n)];
  }
  void set(int k, int l, int n, double v) { v_[index(k, l, n)] = v; }

 private:
  std::size_t index(int k, int l, int n) const {
    return (static_cast<std::size_t>(k - k_lo_) * l_max_ + (l - 1)) * (n_max_ + 1) + n;
  }

  int k_lo_, k_hi_, l_max_, n_max_;
  PrecisionMode mode_;
  std::vector<double> v_;
};

inline PartitionTable build_partition_table(const WeightField& d, int k_lo, int k_hi, int l_max, int n_max,
                                            PrecisionMode mode = PrecisionMode::DoubleDouble) {
  detail::require(1 <= k_lo && k_lo <= k_hi && k_hi <= d.rows(), "build_partition_table: bad k range");
  detail::require(1 <= l_max && l_max <= k_hi, "build_partition_table: bad l_max");
  detail::require(1 <= n_max && n_max <= d.columns(), "build_partition_table: bad n_max");
  std::vector<LogMatrix> from_start;
  for (int r = 1; r <= l_max; ++r) from_start.push_back(single_path_from(d, r, n_max, k_hi));
  PartitionTable table(k_lo, k_hi, l_max, n_max, mode);
  for (int k = k_lo; k <= k_hi; ++k)
    for (int l = 1; l <= std::min(k, l_max); ++l)
      for (int n = 1; n <= n_max; ++n) table.set(k, l, n, detail::lgv_from_rows(from_start, k, l, n, mode));
  return table;
}

// log z_{k,l}(n) = log tau_{k,l}(n) - log tau_{k,l-1}(n), tau_{k,0} = 1,
// defined for 1 <= l <= min(k, n).
class ZArray {
 public:
  ZArray(int k, int n_lo, int n_hi, int l_max)
      : k_(k), n_lo_(n_lo), n_hi_(n_hi), l_max_(l_max),
        v_(static_cast<std::size_t>(n_hi - n_lo + 1) * l_max, std::numeric_limits<double>::quiet_NaN()) {}

  int k() const { return k_; }
  bool defined(int l, int n) const {
    return n >= n_lo_ && n <= n_hi_ && l >= 1 && l <= std::min({k_, n, l_max_});
  }
  double log_z(int l, int n) const {
    if (!defined(l, n)) throw DomainError("z_array: z_{k,l}(n) is undefined for this (l, n)");
    return v_[index(l, n)];
  }
  void set(int l, int n, double v) { v_[index(l, n)] = v; }

 private:
  std::size_t index(int l, int n) const { return static_cast<std::size_t>(n - n_lo_) * l_max_ + (l - 1); }
  int k_, n_lo_, n_hi_, l_max_;
  std::vector<double> v_;
};

inline ZArray z_array(const PartitionTable& tau, int k, int n_lo, int n_hi) {
  detail::require(n_lo >= 1 && n_lo <= n_hi, "z_array: bad n range");
  if (!tau.contains(k, 1, n_hi) || !tau.contains(k, 1, n_lo)) throw DomainError("z_array: k or n outside table");
  const int l_max = std::min(k, tau.l_max());
  ZArray z(k, n_lo, n_hi, l_max);
  for (int n = n_lo; n <= n_hi; ++n) {
    double prev = 0.0;
    for (int l = 1; l <= std::min(l_max, n); ++l) {
      const double cur = tau.log_tau(k, l, n);
      if (!std::isfinite(cur)) throw DomainError("z_array: tau not finite where z is requested");
      z.set(l, n, cur - prev);
      prev = cur;
    }
  }
  return z;
}

// L_i(j) = log z_{2N,i}(2N + j) + 2N h_theta(1), i in [1, k_top], j in [-N, N],
// built from the given environment (needs >= 3N columns and >= 2N rows).
inline DiscreteLineEnsemble line_ensemble_from_field(const WeightField& d, int N, int k_top, double h_theta_1,
                                                     PrecisionMode mode = PrecisionMode::DoubleDouble) {
  detail::require(N >= 1 && k_top >= 1 && k_top <= N, "polymer_line_ensemble: need 1 <= k_top <= N");
  detail::require(d.columns() >= 3 * N && d.rows() >= 2 * N, "polymer_line_ensemble: environment too small");
  const int k = 2 * N;
  std::vector<LogMatrix> from_start;
  for (int r = 1; r <= k_top; ++r) from_start.push_back(single_path_from(d, r, 3 * N, k));
  DiscreteLineEnsemble L(k_top, -N, N);
  const double centering = 2.0 * N * h_theta_1;
  for (int j = -N; j <= N; ++j) {
    const int n = 2 * N + j;
    double prev = 0.0;
    for (int l = 1; l <= k_top; ++l) {
      const double cur = detail::lgv_from_rows(from_start, k, l, n, mode);
      L.at(l, j) = cur - prev + centering;
      prev = cur;
    }
  }
  return L;
}

inline DiscreteLineEnsemble polymer_line_ensemble(ThetaParam theta, int N, int k_top, std::uint64_t seed,
                                                  PrecisionMode mode = PrecisionMode::DoubleDouble) {
  detail::require(N >= 1 && k_top >= 1 && k_top <= N, "polymer_line_ensemble: need 1 <= k_top <= N");
  const WeightField d = sample_weight_field(theta, 3 * N, 2 * N, seed);
  return line_ensemble_from_field(d, N, k_top, h_theta(theta, 1.0), mode);
}

}  // namespace lgle
