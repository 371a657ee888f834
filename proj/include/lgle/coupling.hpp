#pragma once

// Grand monotone coupling of Gibbs ensembles of k bridges on times 0..T-1
// with entrance values x, exit values y, top boundary +inf and bottom curve z.
//
// Interior points are ordered lexicographically, P_1 < ... < P_n with
// n = k(T-2), and values are assigned from P_n down to P_1: L(P_m) is the
// inverse conditional CDF of L(P_m) given the values at the later points,
// evaluated at omega_m. Feeding the same omega to ordered boundary data gives
// ordered ensembles.
//
// Conditional densities are obtained by integrating out the earlier points
// with forward and backward transfer sweeps over time on a uniform grid. The
// state at time t holds the unknown curves at that time on the grid.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "lgle/bridge.hpp"
#include "lgle/errors.hpp"
#include "lgle/gibbs.hpp"
#include "lgle/grid_density.hpp"
#include "lgle/line_ensemble.hpp"
#include "lgle/rng.hpp"

namespace lgle {

struct LatticePoint {
  int i = 1;
  int t = 1;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

class PointOrder {
 public:
  PointOrder(int k, int T) : k_(k), T_(T) {
    detail::require(k >= 1 && T >= 2, "order_points: need k >= 1 and T >= 2");
    for (int i = 1; i <= k; ++i)
      for (int t = 1; t <= T - 2; ++t) points_.push_back({i, t});
  }

  int k() const { return k_; }
  int T() const { return T_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<LatticePoint>& points() const { return points_; }

  // 0-based position of P in the order.
  std::size_t index(LatticePoint p) const {
    detail::require(p.i >= 1 && p.i <= k_ && p.t >= 1 && p.t <= T_ - 2, "PointOrder: point outside interior");
    return static_cast<std::size_t>(p.i - 1) * (T_ - 2) + static_cast<std::size_t>(p.t - 1);
  }

  // A_P: the points after P.
  std::vector<LatticePoint> successors(LatticePoint p) const {
    return {points_.begin() + static_cast<std::ptrdiff_t>(index(p)) + 1, points_.end()};
  }
  // B_P: the points before P.
  std::vector<LatticePoint> predecessors(LatticePoint p) const {
    return {points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(index(p))};
  }

 private:
  int k_;
  int T_;
  std::vector<LatticePoint> points_;
};

inline PointOrder order_points(int k, int T) { return {k, T}; }

struct CouplingUniforms {
  std::vector<double> omega;

  void validate(std::size_t n) const {
    detail::require(omega.size() == n, "CouplingUniforms: need one uniform per interior point");
    for (double w : omega) detail::require(w > 0.0 && w < 1.0, "CouplingUniforms: entries must lie in (0,1)");
  }

  static CouplingUniforms draw(std::size_t n, Rng& rng) {
    CouplingUniforms u;
    u.omega.resize(n);
    for (auto& w : u.omega) w = uniform_open(rng);
    return u;
  }
};

struct BoundaryTriple {
  std::vector<double> x;  // L_i(0)
  std::vector<double> y;  // L_i(T-1)
  std::vector<double> z;  // bottom curve on 0..T-1, -inf allowed

  void validate(int k, int T) const {
    detail::require(static_cast<int>(x.size()) == k && static_cast<int>(y.size()) == k,
                    "BoundaryTriple: x and y need k entries");
    detail::require(static_cast<int>(z.size()) == T, "BoundaryTriple: z needs T entries");
    for (double v : x) detail::require(std::isfinite(v), "BoundaryTriple: x must be finite");
    for (double v : y) detail::require(std::isfinite(v), "BoundaryTriple: y must be finite");
    for (double v : z) detail::require(!std::isnan(v) && v < kInf, "BoundaryTriple: z must be finite or -inf");
  }

  // Componentwise order of x, y and z.
  bool below_or_equal(const BoundaryTriple& o) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > o.x[i] || y[i] > o.y[i]) return false;
    for (std::size_t t = 0; t < z.size(); ++t)
      if (z[t] > o.z[t]) return false;
    return true;
  }

  BoundaryTriple shifted(double c) const {
    BoundaryTriple b = *this;
    for (auto& v : b.x) v += c;
    for (auto& v : b.y) v += c;
    for (auto& v : b.z) v += c;
    return b;
  }
};

inline constexpr int kDefaultCouplingGridPoints = 256;

struct CouplingProblem {
  int k = 1;
  int T = 3;
  HrwSpec hrw = default_hrw();
  InteractionSpec interaction;  // bonds 0..T-2; empty means H(x) = e^x on every bond
  bool allow_k3 = false;

  void validate() const {
    detail::require(k >= 1 && T >= 2, "CouplingProblem: need k >= 1 and T >= 2");
    if (k > 3 || (k == 3 && !allow_k3))
      throw DomainError("CouplingProblem: k <= 2 supported by default, k = 3 needs the opt-in flag");
    if (interaction.bonds() != 0)
      detail::require(interaction.first_bond() == 0 && interaction.bonds() == T - 1,
                      "CouplingProblem: need one interaction per bond 0..T-2");
  }

  const Interaction& bond(int t) const {
    static const Interaction exp_h = Interaction::exp_kind();
    return interaction.bonds() == 0 ? exp_h : interaction.at(t);
  }
};

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int m = kDefaultCouplingGridPoints;

  double step() const { return (hi - lo) / (m - 1); }
  double x(int j) const { return lo + j * step(); }
};

// Common grid for a family of boundary data: the range of x, y and finite z
// widened by 8 sd sqrt(T-1) + 8 of the increment law on each side.
inline GridSpec coupling_grid(const CouplingProblem& problem, std::span<const BoundaryTriple> boundaries,
                              int m = kDefaultCouplingGridPoints) {
  detail::require(!boundaries.empty(), "coupling_grid: need at least one boundary");
  detail::require(m >= 256, "coupling_grid: grid resolution must be >= 256");
  double lo = kInf, hi = -kInf;
  for (const auto& b : boundaries) {
    for (double v : b.x) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : b.y) lo = std::min(lo, v), hi = std::max(hi, v);
  }
  // z only matters from above: curves sit over it, and far-below z has
  // interaction factor ~1.
  for (const auto& b : boundaries)
    for (double v : b.z)
      if (std::isfinite(v)) hi = std::max(hi, v);
  const double w = 8.0 * std::sqrt(problem.hrw.variance() * std::max(1, problem.T - 1)) + 8.0;
  return {lo - w, hi + w, m};
}

namespace detail {

// Function on grid^rank with labelled axes; axis 0 varies fastest.
class GridTensor {
 public:
  explicit GridTensor(int m) : m_(m), data_{1.0} {}

  int rank() const { return static_cast<int>(labels_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& data() const { return data_; }
  bool has(int label) const { return std::find(labels_.begin(), labels_.end(), label) != labels_.end(); }

  int axis(int label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw InternalError("GridTensor: missing axis");
    return static_cast<int>(it - labels_.begin());
  }

  // New axis j is old axis order[j].
  void permute(const std::vector<int>& order) {
    const int d = rank();
    bool identity = true;
    for (int j = 0; j < d; ++j) identity = identity && order[j] == j;
    if (identity) return;
    std::vector<std::size_t> target_stride(d);
    for (int j = 0; j < d; ++j) target_stride[order[j]] = pow_m(j);
    std::vector<double> out(data_.size());
    std::vector<int> digit(d, 0);
    std::size_t target = 0;
    for (std::size_t l = 0; l < data_.size(); ++l) {
      out[target] = data_[l];
      for (int a = 0; a < d; ++a) {
        target += target_stride[a];
        if (++digit[a] < m_) break;
        target -= static_cast<std::size_t>(m_) * target_stride[a];
        digit[a] = 0;
      }
    }
    std::vector<int> labels(d);
    for (int j = 0; j < d; ++j) labels[j] = labels_[order[j]];
    labels_ = std::move(labels);
    data_ = std::move(out);
  }

  void move_to_front(int label) {
    const int a = axis(label);
    if (a == 0) return;
    std::vector<int> order{a};
    for (int j = 0; j < rank(); ++j)
      if (j != a) order.push_back(j);
    permute(order);
  }

  void sort_axes() {
    std::vector<int> order(rank());
    for (int j = 0; j < rank(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int p, int q) { return labels_[p] < labels_[q]; });
    permute(order);
  }

  void relabel(int from, int to) { labels_[axis(from)] = to; }

  void mul_vec(int label, std::span<const double> v) {
    const std::size_t stride = pow_m(axis(label));
    const std::size_t block = stride * m_;
    for (std::size_t base = 0; base < data_.size(); base += block)
      for (int j = 0; j < m_; ++j) {
        const double f = v[j];
        double* p = data_.data() + base + j * stride;
        for (std::size_t s = 0; s < stride; ++s) p[s] *= f;
      }
  }

  // Multiply by K(index along la, index along lb).
  void mul_pair(int la, int lb, const Eigen::MatrixXd& K) {
    const std::size_t sa = pow_m(axis(la)), sb = pow_m(axis(lb));
    for (std::size_t l = 0; l < data_.size(); ++l)
      data_[l] *= K(static_cast<Eigen::Index>((l / sa) % m_), static_cast<Eigen::Index>((l / sb) % m_));
  }

  // out(v, ...) = sum_u K(v, u) in(u, ...), or K(u, v) when transposed,
  // with the axis renamed.
  void transform(int label, const Eigen::MatrixXd& K, int new_label, bool transposed = false) {
    move_to_front(label);
    const auto cols = static_cast<Eigen::Index>(data_.size() / m_);
    Eigen::Map<Eigen::MatrixXd> X(data_.data(), m_, cols);
    const Eigen::MatrixXd Y = transposed ? Eigen::MatrixXd(K.transpose() * X) : Eigen::MatrixXd(K * X);
    std::copy(Y.data(), Y.data() + Y.size(), data_.begin());
    labels_[0] = new_label;
  }

  // out(...) = sum_u w(u) in(u, ...).
  void contract(int label, std::span<const double> w) {
    move_to_front(label);
    const auto cols = static_cast<Eigen::Index>(data_.size() / m_);
    Eigen::Map<const Eigen::MatrixXd> X(data_.data(), m_, cols);
    Eigen::Map<const Eigen::VectorXd> wv(w.data(), m_);
    const Eigen::RowVectorXd r = wv.transpose() * X;
    data_.assign(r.data(), r.data() + r.size());
    labels_.erase(labels_.begin());
  }

  // out(v, ...) = w(v) in(...), new axis in front.
  void add_axis(int label, std::span<const double> w) {
    std::vector<double> out(data_.size() * m_);
    for (std::size_t l = 0; l < data_.size(); ++l)
      for (int j = 0; j < m_; ++j) out[l * m_ + j] = w[j] * data_[l];
    data_ = std::move(out);
    labels_.insert(labels_.begin(), label);
  }

  void rescale() {
    double mx = 0.0;
    for (double v : data_) mx = std::max(mx, v);
    if (!(mx > 1e-300) || !std::isfinite(mx)) throw PrecisionError("coupling: conditional density underflow on grid");
    for (auto& v : data_) v /= mx;
    log_scale_ += std::log(mx);
  }

  double log_scale() const { return log_scale_; }

 private:
  std::size_t pow_m(int a) const {
    std::size_t s = 1;
    for (int j = 0; j < a; ++j) s *= static_cast<std::size_t>(m_);
    return s;
  }

  int m_;
  std::vector<int> labels_;
  std::vector<double> data_;
  double log_scale_ = 0.0;
};

}  // namespace detail

// Conditional densities and the coupled sampler for one boundary triple.
class CouplingSolver {
 public:
  CouplingSolver(CouplingProblem problem, BoundaryTriple boundary, GridSpec grid)
      : problem_(std::move(problem)), b_(std::move(boundary)), grid_(grid), order_(problem_.k, problem_.T) {
    problem_.validate();
    b_.validate(problem_.k, problem_.T);
    detail::require(grid_.m >= 256 && grid_.hi > grid_.lo, "CouplingSolver: grid resolution must be >= 256");
    const int m = grid_.m;
    const double h = grid_.step();
    // Toeplitz kernels on grid differences (a - b) h.
    std::vector<double> g_diff(2 * m - 1);
    for (int d = -(m - 1); d <= m - 1; ++d) g_diff[d + m - 1] = problem_.hrw.density(d * h);
    g_fwd_.resize(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) g_fwd_(a, c) = g_diff[a - c + m - 1];
    // Pair kernels are only needed when two adjacent curves are unknown.
    if (problem_.k >= 2) {
      e_fwd_.resize(static_cast<std::size_t>(problem_.T - 1));
      for (int t = 0; t + 1 < problem_.T; ++t) {
        if (problem_.bond(t).is_zero()) continue;
        if (problem_.interaction.bonds() == 0 && t > 0)
          e_fwd_[static_cast<std::size_t>(t)] = e_fwd_[0];
        else
          e_fwd_[static_cast<std::size_t>(t)] = build_e_kernel(t);
      }
    }
    // Forward messages for the top sweep read only x and z.
    DiscreteLineEnsemble L(problem_.k, 0, problem_.T - 1);
    for (int i = 1; i <= problem_.k; ++i) L.at(i, 0) = b_.x[i - 1];
    top_prefix_ = forward_prefix(L, problem_.k);
  }

  const CouplingProblem& problem() const { return problem_; }
  const BoundaryTriple& boundary() const { return b_; }
  const GridSpec& grid() const { return grid_; }
  const PointOrder& order() const { return order_; }

  // Unnormalised density of L(P) given the values of `known` at the points
  // after P; values at the points before P are ignored.
  GridDensity conditional_density(const DiscreteLineEnsemble& known, LatticePoint P) const {
    check_ensemble(known);
    const std::vector<detail::GridTensor> alpha = forward_prefix(known, P.i);
    return density_at(known, P, alpha[static_cast<std::size_t>(P.t)]);
  }

  DiscreteLineEnsemble sample(const CouplingUniforms& u) const {
    u.validate(order_.size());
    const int k = problem_.k, T = problem_.T;
    DiscreteLineEnsemble L(k, 0, T - 1);
    for (int i = 1; i <= k; ++i) {
      L.at(i, 0) = b_.x[i - 1];
      L.at(i, T - 1) = b_.y[i - 1];
    }
    for (int p1 = k; p1 >= 1; --p1) {
      if (T - 2 < 1) break;
      std::vector<detail::GridTensor> fresh;
      const std::vector<detail::GridTensor>* alpha;
      if (p1 == k) {
        alpha = &top_prefix_;
      } else {
        fresh = forward_prefix(L, p1);
        alpha = &fresh;
      }
      for (int p2 = T - 2; p2 >= 1; --p2) {
        const LatticePoint P{p1, p2};
        const GridDensity d = density_at(L, P, (*alpha)[static_cast<std::size_t>(p2)]);
        const std::vector<double> cdf = d.cdf();
        L.at(p1, p2) = inverse_cdf(cdf, d.lo, d.step(), u.omega[order_.index(P)]);
      }
    }
    return L;
  }

 private:
  static constexpr int kNew = 1000;

  void check_ensemble(const DiscreteLineEnsemble& L) const {
    if (L.curves() != problem_.k || L.T0() != 0 || L.T1() != problem_.T - 1 || L.first_curve() != 1)
      throw DomainError("CouplingSolver: ensemble shape mismatch");
  }

  // Curve i is unknown at an interior time t when i <= q_before for t <= p2,
  // or i <= q_after for t > p2.
  static bool unknown(int i, int t, int T, int q_before, int q_after, int p2) {
    if (t <= 0 || t >= T - 1) return false;
    return i <= (t <= p2 ? q_before : q_after);
  }

  std::shared_ptr<const Eigen::MatrixXd> build_e_kernel(int t) const {
    const int m = grid_.m;
    const double h = grid_.step();
    const Interaction& H = problem_.bond(t);
    std::vector<double> diff(2 * m - 1);
    for (int d = -(m - 1); d <= m - 1; ++d) diff[d + m - 1] = std::exp(-H(d * h));
    auto K = std::make_shared<Eigen::MatrixXd>(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) (*K)(a, c) = diff[a - c + m - 1];
    return K;
  }

  const Eigen::MatrixXd& e_kernel(int t) const { return *e_fwd_[static_cast<std::size_t>(t)]; }

  std::vector<double> g_vec(double sign, double c) const {
    // sign = +1: G(x_j - c); sign = -1: G(c - x_j)
    std::vector<double> v(grid_.m);
    for (int j = 0; j < grid_.m; ++j) v[j] = problem_.hrw.density(sign * (grid_.x(j) - c));
    return v;
  }

  std::vector<double> e_vec(int t, double sign, double c) const {
    const Interaction& H = problem_.bond(t);
    std::vector<double> v(grid_.m);
    for (int j = 0; j < grid_.m; ++j) v[j] = std::exp(-H(sign * (grid_.x(j) - c)));
    return v;
  }

  double value(const DiscreteLineEnsemble& L, int i, int t) const { return L.at(i, t); }

  double bottom(int t) const { return b_.z[static_cast<std::size_t>(t)]; }

  // alpha[t] for t = 0..T-2 over curves 1..q at time t (all interior times
  // unknown for those curves), using bonds 0..t-1.
  std::vector<detail::GridTensor> forward_prefix(const DiscreteLineEnsemble& L, int q) const {
    const int T = problem_.T;
    std::vector<detail::GridTensor> out;
    out.emplace_back(grid_.m);
    for (int t = 0; t + 1 <= T - 2; ++t) {
      detail::GridTensor a = out.back();
      forward_step(a, L, t, q, T - 2, T);
      out.push_back(std::move(a));
    }
    return out;
  }

  // Apply bond t -> t+1 to a message over the unknown curves at t, producing
  // a message over the unknown curves at t+1. Unknown curves are 1..q at
  // interior times <= p2 and 1..q-1 after.
  void forward_step(detail::GridTensor& a, const DiscreteLineEnsemble& L, int t, int q, int p2, int T) const {
    const int k = problem_.k;
    const Interaction& H = problem_.bond(t);
    auto unk = [&](int i, int s) { return unknown(i, s, T, q, q - 1, p2); };
    for (int i = k; i >= 1; --i) {
      const bool old_u = unk(i, t);
      if (!H.is_zero()) {
        const bool nb_u = i < k && unk(i + 1, t + 1);
        const double nb = i < k ? (nb_u ? 0.0 : value(L, i + 1, t + 1)) : bottom(t + 1);
        if (nb_u && old_u)
          a.mul_pair(kNew + i + 1, i, e_kernel(t));
        else if (nb_u)
          a.mul_vec(kNew + i + 1, e_vec(t, +1.0, value(L, i, t)));
        else if (old_u && nb != -kInf)
          a.mul_vec(i, e_vec(t, -1.0, nb));
      }
      const bool new_u = unk(i, t + 1);
      if (old_u && new_u)
        a.transform(i, g_fwd_, kNew + i);
      else if (old_u)
        a.contract(i, g_vec(-1.0, value(L, i, t + 1)));
      else if (new_u)
        a.add_axis(kNew + i, g_vec(+1.0, value(L, i, t)));
    }
    for (int lab : std::vector<int>(a.labels())) a.relabel(lab, lab - kNew);
    a.sort_axes();
    a.rescale();
  }

  // Apply bond t -> t+1 backwards: message over unknown curves at t+1 to a
  // message over unknown curves at t.
  void backward_step(detail::GridTensor& b, const DiscreteLineEnsemble& L, int t, int q, int p2, int T) const {
    const int k = problem_.k;
    const Interaction& H = problem_.bond(t);
    auto unk = [&](int i, int s) { return unknown(i, s, T, q, q - 1, p2); };
    for (int lab : std::vector<int>(b.labels())) b.relabel(lab, lab + kNew);
    for (int i = 1; i <= k; ++i) {
      const bool new_u = unk(i, t + 1);
      if (i >= 2 && !H.is_zero()) {
        const bool up_u = unk(i - 1, t);
        if (new_u && up_u)
          b.mul_pair(kNew + i, i - 1, e_kernel(t));
        else if (new_u)
          b.mul_vec(kNew + i, e_vec(t, +1.0, value(L, i - 1, t)));
        else if (up_u)
          b.mul_vec(i - 1, e_vec(t, -1.0, value(L, i, t + 1)));
      }
      const bool old_u = unk(i, t);
      if (new_u && old_u)
        b.transform(kNew + i, g_fwd_, i, true);
      else if (new_u)
        b.contract(kNew + i, g_vec(+1.0, value(L, i, t)));
      else if (old_u)
        b.add_axis(i, g_vec(-1.0, value(L, i, t + 1)));
    }
    if (!H.is_zero() && unk(k, t) && bottom(t + 1) != -kInf) b.mul_vec(k, e_vec(t, -1.0, bottom(t + 1)));
    b.sort_axes();
    b.rescale();
  }

  GridDensity density_at(const DiscreteLineEnsemble& L, LatticePoint P, const detail::GridTensor& alpha) const {
    const int T = problem_.T;
    detail::GridTensor beta(grid_.m);
    for (int t = T - 2; t >= P.t; --t) backward_step(beta, L, t, P.i, P.t, T);
    if (alpha.labels() != beta.labels() || alpha.labels().empty() || alpha.labels().back() != P.i)
      throw InternalError("coupling: message axes disagree");
    const std::vector<double>& a = alpha.data();
    const std::vector<double>& bb = beta.data();
    const std::size_t inner = a.size() / grid_.m;
    std::vector<double> dens(grid_.m, 0.0);
    for (int j = 0; j < grid_.m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < inner; ++r) s += a[j * inner + r] * bb[j * inner + r];
      dens[j] = s;
    }
    double mx = 0.0;
    for (double v : dens) mx = std::max(mx, v);
    if (!(mx > 1e-300)) throw PrecisionError("coupling: conditional density underflow on grid");
    for (auto& v : dens) v /= mx;
    return {grid_.lo, grid_.hi, std::move(dens), alpha.log_scale() + beta.log_scale() + std::log(mx)};
  }

  CouplingProblem problem_;
  BoundaryTriple b_;
  GridSpec grid_;
  PointOrder order_;
  Eigen::MatrixXd g_fwd_;
  std::vector<std::shared_ptr<const Eigen::MatrixXd>> e_fwd_;
  std::vector<detail::GridTensor> top_prefix_;
};

// F(s) of a tabulated density by the trapezoid rule, linear between nodes.
inline double conditional_cdf(const GridDensity& density, double s) {
  const std::vector<double> cdf = density.cdf();
  for (std::size_t i = 1; i < cdf.size(); ++i)
    if (cdf[i] < cdf[i - 1]) throw InternalError("conditional_cdf: CDF not monotone");
  if (s <= density.lo) return 0.0;
  if (s >= density.hi) return 1.0;
  const double pos = (s - density.lo) / density.step();
  const int i = std::min(static_cast<int>(pos), density.m() - 2);
  const double w = pos - i;
  return (1.0 - w) * cdf[i] + w * cdf[i + 1];
}

inline double conditional_quantile(const GridDensity& density, double u) {
  detail::require(u > 0.0 && u < 1.0, "conditional_quantile: u must lie in (0,1)");
  return inverse_cdf(density.cdf(), density.lo, density.step(), u);
}

inline DiscreteLineEnsemble grand_coupling_sample(const CouplingProblem& problem, const BoundaryTriple& b,
                                                  const CouplingUniforms& omega,
                                                  int grid_m = kDefaultCouplingGridPoints) {
  const BoundaryTriple one[] = {b};
  return CouplingSolver(problem, b, coupling_grid(problem, one, grid_m)).sample(omega);
}

struct MonotonicityReport {
  double max_violation = 0.0;
  long violations = 0;
  int n_draws = 0;
  int grid_m = 0;
  double eps_grid = 0.0;

  nlohmann::ordered_json to_json() const {
    return {{"max_violation", max_violation}, {"n_draws", n_draws}, {"grid_m", grid_m}, {"eps_grid", eps_grid},
            {"violations", violations}};
  }
};

// Samples both boundaries with common uniforms on a common grid and records
// the largest positive part of L_low - L_high over the lattice.
inline MonotonicityReport monotonicity_check(const CouplingProblem& problem, const BoundaryTriple& b_low,
                                             const BoundaryTriple& b_high, int n_draws, Rng& rng,
                                             int grid_m = kDefaultCouplingGridPoints) {
  problem.validate();
  b_low.validate(problem.k, problem.T);
  b_high.validate(problem.k, problem.T);
  if (!b_low.below_or_equal(b_high)) throw DomainError("monotonicity_check: b_low must be <= b_high componentwise");
  detail::require(n_draws >= 1, "monotonicity_check: n_draws must be >= 1");
  const BoundaryTriple both[] = {b_low, b_high};
  const GridSpec grid = coupling_grid(problem, both, grid_m);
  const CouplingSolver low(problem, b_low, grid), high(problem, b_high, grid);
  MonotonicityReport r;
  r.n_draws = n_draws;
  r.grid_m = grid_m;
  r.eps_grid = 1e-8 * (grid.hi - grid.lo);
  for (int s = 0; s < n_draws; ++s) {
    const CouplingUniforms u = CouplingUniforms::draw(low.order().size(), rng);
    const DiscreteLineEnsemble a = low.sample(u), c = high.sample(u);
    for (std::size_t j = 0; j < a.data().size(); ++j) {
      const double v = a.data()[j] - c.data()[j];
      r.max_violation = std::max(r.max_violation, v);
      if (v > r.eps_grid) ++r.violations;
    }
  }
  return r;
}

struct ContinuityReport {
  std::vector<double> deltas;
  std::vector<double> changes;
  double eps_grid = 0.0;
  bool monotone_shrink = true;

  nlohmann::ordered_json to_json() const {
    return {{"deltas", deltas}, {"changes", changes}, {"eps_grid", eps_grid}, {"monotone_shrink", monotone_shrink}};
  }
};

// Perturbs every boundary value by at most delta (alternating signs), halves
// delta `halvings` times, and records the sup-norm change of the coupled
// output under a fixed omega and a fixed grid.
inline ContinuityReport continuity_check(const CouplingProblem& problem, const BoundaryTriple& b, double delta,
                                         const CouplingUniforms& omega, int halvings = 6,
                                         int grid_m = kDefaultCouplingGridPoints) {
  detail::require(delta >= 0.0, "continuity_check: delta must be >= 0");
  detail::require(halvings >= 0, "continuity_check: halvings must be >= 0");
  const BoundaryTriple one[] = {b};
  GridSpec grid = coupling_grid(problem, one, grid_m);
  grid.lo -= delta;
  grid.hi += delta;
  const DiscreteLineEnsemble base = CouplingSolver(problem, b, grid).sample(omega);
  ContinuityReport r;
  r.eps_grid = 1e-8 * (grid.hi - grid.lo);
  double d = delta;
  for (int h = 0; h <= halvings; ++h, d *= 0.5) {
    BoundaryTriple p = b;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      p.x[i] += (i % 2 == 0 ? d : -d);
      p.y[i] += (i % 2 == 0 ? -0.5 * d : 0.75 * d);
    }
    for (std::size_t t = 0; t < p.z.size(); ++t)
      if (std::isfinite(p.z[t])) p.z[t] += (t % 2 == 0 ? d : -d);
    const DiscreteLineEnsemble out = CouplingSolver(problem, p, grid).sample(omega);
    double change = 0.0;
    for (std::size_t j = 0; j < out.data().size(); ++j)
      change = std::max(change, std::abs(out.data()[j] - base.data()[j]));
    r.deltas.push_back(d);
    r.changes.push_back(change);
    if (r.changes.size() >= 2 && change > r.changes[r.changes.size() - 2] + r.eps_grid) r.monotone_shrink = false;
  }
  return r;
}

}  // namespace lgle
