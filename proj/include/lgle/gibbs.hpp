#pragma once

// (H, H^RW)-Gibbs measures on ensembles of random walk bridges: curves
// k1..k2 on times a..b, pinned at both ends, confined between an upper
// boundary f (curve k1 - 1) and a lower boundary g (curve k2 + 1), and
// reweighted by the Boltzmann factor
//
//   W = exp( - sum_{i=k1-1}^{k2} sum_{m=a}^{b-1} H_m( L_{i+1}(m+1) - L_i(m) ) ).

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "lgle/bridge.hpp"
#include "lgle/empirical.hpp"
#include "lgle/errors.hpp"
#include "lgle/line_ensemble.hpp"
#include "lgle/rng.hpp"

namespace lgle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class InteractionKind { Exp, Zero, Tabulated };

// A single interaction Hamiltonian: continuous, nonnegative, nondecreasing
// and convex, with H(-inf) = 0.
class Interaction {
 public:
  static Interaction exp_kind() { return Interaction(InteractionKind::Exp); }
  static Interaction zero() { return Interaction(InteractionKind::Zero); }

  // Piecewise-linear H through (lo + i h, values[i]); H = 0 left of lo and
  // continues with the last slope right of hi. values[0] must be 0.
  static Interaction tabulated(double lo, double hi, std::vector<double> values) {
    detail::require(values.size() >= 2 && hi > lo, "Interaction: tabulated kind needs >= 2 nodes and hi > lo");
    detail::require(values.front() == 0.0, "Interaction: tabulated H must start at 0");
    const double scale = std::max(1.0, std::abs(values.back()));
    for (std::size_t i = 1; i < values.size(); ++i)
      detail::require(values[i] >= values[i - 1], "Interaction: tabulated H must be nondecreasing");
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
      detail::require(values[i + 1] - 2.0 * values[i] + values[i - 1] >= -1e-12 * scale,
                      "Interaction: tabulated H must be convex");
    Interaction h(InteractionKind::Tabulated);
    h.lo_ = lo;
    h.step_ = (hi - lo) / static_cast<double>(values.size() - 1);
    h.values_ = std::move(values);
    return h;
  }

  InteractionKind kind() const { return kind_; }
  bool is_zero() const { return kind_ == InteractionKind::Zero; }

  double operator()(double x) const {
    if (x == -kInf) return 0.0;
    switch (kind_) {
      case InteractionKind::Exp:
        return std::exp(x);
      case InteractionKind::Zero:
        return 0.0;
      case InteractionKind::Tabulated: {
        if (x <= lo_) return 0.0;
        const double pos = (x - lo_) / step_;
        const std::size_t last = values_.size() - 1;
        if (pos >= static_cast<double>(last))
          return values_[last] + (pos - static_cast<double>(last)) * (values_[last] - values_[last - 1]);
        const auto i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * values_[i] + w * values_[i + 1];
      }
    }
    return 0.0;
  }

 private:
  explicit Interaction(InteractionKind kind) : kind_(kind) {}

  InteractionKind kind_;
  double lo_ = 0.0;
  double step_ = 1.0;
  std::vector<double> values_;
};

// One Hamiltonian per bond m in [a, b-1].
class InteractionSpec {
 public:
  InteractionSpec() = default;
  InteractionSpec(int a, std::vector<Interaction> bonds) : a_(a), bonds_(std::move(bonds)) {}

  static InteractionSpec uniform(const Interaction& h, int a, int b) {
    detail::require(a < b, "InteractionSpec: need a < b");
    return {a, std::vector<Interaction>(static_cast<std::size_t>(b - a), h)};
  }

  int first_bond() const { return a_; }
  int bonds() const { return static_cast<int>(bonds_.size()); }
  const Interaction& at(int m) const {
    if (m < a_ || m >= a_ + bonds()) throw DomainError("InteractionSpec: bond index out of range");
    return bonds_[static_cast<std::size_t>(m - a_)];
  }
  bool all_zero() const {
    return std::all_of(bonds_.begin(), bonds_.end(), [](const Interaction& h) { return h.is_zero(); });
  }

  // The bonds for the sub-interval [a, b].
  InteractionSpec restrict_to(int a, int b) const {
    detail::require(a >= a_ && b <= a_ + bonds() && a < b, "InteractionSpec: restriction outside range");
    return {a, std::vector<Interaction>(bonds_.begin() + (a - a_), bonds_.begin() + (b - a_))};
  }

 private:
  int a_ = 0;
  std::vector<Interaction> bonds_;
};

struct EnsembleSpec {
  int k1 = 1;
  int k2 = 1;
  int a = 0;
  int b = 1;
  std::vector<double> x;  // entrance values, curves k1..k2
  std::vector<double> y;  // exit values, curves k1..k2
  std::vector<double> f;  // top boundary on a..b, +inf allowed
  std::vector<double> g;  // bottom boundary on a..b, -inf allowed
  HrwSpec hrw = default_hrw();
  InteractionSpec interaction;

  int curves() const { return k2 - k1 + 1; }
  int width() const { return b - a + 1; }

  void validate() const {
    detail::require(k1 <= k2, "EnsembleSpec: need k1 <= k2");
    detail::require(a < b, "EnsembleSpec: need a < b");
    detail::require(static_cast<int>(x.size()) == curves() && static_cast<int>(y.size()) == curves(),
                    "EnsembleSpec: entrance/exit vectors must have one entry per curve");
    detail::require(static_cast<int>(f.size()) == width() && static_cast<int>(g.size()) == width(),
                    "EnsembleSpec: boundary curves must be defined on [a, b]");
    detail::require(interaction.first_bond() == a && interaction.bonds() == b - a,
                    "EnsembleSpec: one interaction per bond [a, b-1] required");
    for (double v : x) detail::require(std::isfinite(v), "EnsembleSpec: entrance values must be finite");
    for (double v : y) detail::require(std::isfinite(v), "EnsembleSpec: exit values must be finite");
    for (double v : f) detail::require(!std::isnan(v) && v > -kInf, "EnsembleSpec: f must be finite or +inf");
    for (double v : g) detail::require(!std::isnan(v) && v < kInf, "EnsembleSpec: g must be finite or -inf");
  }

  double top(int m) const { return f[static_cast<std::size_t>(m - a)]; }
  double bottom(int m) const { return g[static_cast<std::size_t>(m - a)]; }
};

// Spec with f = +inf, g = -inf and a uniform interaction.
inline EnsembleSpec free_boundary_spec(int k1, int k2, int a, int b, std::vector<double> x, std::vector<double> y,
                                       const HrwSpec& hrw, const Interaction& h) {
  EnsembleSpec s{k1, k2, a, b, std::move(x), std::move(y), std::vector<double>(static_cast<std::size_t>(b - a + 1), kInf),
                 std::vector<double>(static_cast<std::size_t>(b - a + 1), -kInf), hrw,
                 InteractionSpec::uniform(h, a, b)};
  s.validate();
  return s;
}

// Value of curve i at time m, reading f and g for i = k1 - 1 and k2 + 1.
inline double boundary_or_curve(const EnsembleSpec& spec, const DiscreteLineEnsemble& L, int i, int m) {
  if (i == spec.k1 - 1) return spec.top(m);
  if (i == spec.k2 + 1) return spec.bottom(m);
  return L.at(i, m);
}

// Total interaction energy; terms whose argument is -inf contribute 0.
inline double hamiltonian_sum(const EnsembleSpec& spec, const DiscreteLineEnsemble& L) {
  if (L.first_curve() != spec.k1 || L.curves() != spec.curves() || L.T0() != spec.a || L.T1() != spec.b)
    throw DomainError("Gibbs: ensemble dimensions do not match the EnsembleSpec");
  CompensatedSum s;
  for (int i = spec.k1 - 1; i <= spec.k2; ++i)
    for (int m = spec.a; m < spec.b; ++m) {
      const Interaction& h = spec.interaction.at(m);
      if (h.is_zero()) continue;
      const double arg = boundary_or_curve(spec, L, i + 1, m + 1) - boundary_or_curve(spec, L, i, m);
      if (arg == -kInf || std::isnan(arg)) continue;
      s.add(h(arg));
    }
  return s.value();
}

inline double boltzmann_weight(const EnsembleSpec& spec, const DiscreteLineEnsemble& L) {
  spec.validate();
  return std::exp(-hamiltonian_sum(spec, L));
}

struct AcceptanceEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int n_mc = 0;
  long attempts = 0;
  bool low_acceptance_warning = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = {{"estimate", estimate}, {"std_error", std_error}, {"n_mc", n_mc}, {"attempts", attempts}};
    if (low_acceptance_warning) j["warning"] = "acceptance probability below 1e-5";
    return j;
  }
};

struct RejectionDraw {
  DiscreteLineEnsemble ensemble;
  long attempts = 0;
};

inline constexpr long kDefaultAttemptBudget = 1000000;
inline constexpr double kLowAcceptance = 1e-5;

// Curve index range and time range of a resampling window.
struct SubBox {
  int i1 = 1;
  int i2 = 1;
  int c = 0;
  int d = 1;
};

class GibbsModel {
 public:
  explicit GibbsModel(EnsembleSpec spec, int grid_m = kDefaultGridPoints)
      : spec_(std::move(spec)) {
    spec_.validate();
    law_ = std::make_shared<const BridgeLaw>(spec_.hrw, std::max(1, spec_.b - spec_.a - 1), grid_m);
  }

  GibbsModel(EnsembleSpec spec, std::shared_ptr<const BridgeLaw> law) : spec_(std::move(spec)), law_(std::move(law)) {
    spec_.validate();
    detail::require(law_ && law_->max_steps() >= spec_.b - spec_.a - 1, "GibbsModel: bridge law too short");
  }

  const EnsembleSpec& spec() const { return spec_; }
  const std::shared_ptr<const BridgeLaw>& law() const { return law_; }

  // Independent bridges for every curve, without interaction.
  DiscreteLineEnsemble free_bridges(Rng& rng) const {
    DiscreteLineEnsemble L(spec_.curves(), spec_.a, spec_.b, spec_.k1);
    for (int i = spec_.k1; i <= spec_.k2; ++i) {
      const BridgeSpec bs{spec_.a, spec_.b, spec_.x[i - spec_.k1], spec_.y[i - spec_.k1], spec_.hrw};
      const auto path = sample_bridge_sequential(*law_, bs, rng);
      std::copy(path.begin(), path.end(), L.curve(i).begin());
    }
    return L;
  }

  double curve_value(const DiscreteLineEnsemble& L, int i, int m) const { return boundary_or_curve(spec_, L, i, m); }

  double boltzmann_weight(const DiscreteLineEnsemble& L) const { return std::exp(-hamiltonian_sum(spec_, L)); }

  AcceptanceEstimate acceptance_probability(int n_mc, Rng& rng) const {
    detail::require(n_mc >= 100, "acceptance_probability: n_mc must be >= 100");
    std::vector<double> w(static_cast<std::size_t>(n_mc));
    for (auto& v : w) v = boltzmann_weight(free_bridges(rng));
    const MeanEstimate m = mean_estimate(w);
    AcceptanceEstimate out;
    out.estimate = std::clamp(m.mean, 0.0, 1.0);
    out.std_error = m.std_error;
    out.n_mc = n_mc;
    out.attempts = n_mc;
    out.low_acceptance_warning = out.estimate < kLowAcceptance;
    return out;
  }

  RejectionDraw sample_rejection(Rng& rng, long budget = kDefaultAttemptBudget) const {
    detail::require(budget >= 1, "sample_rejection: budget must be >= 1");
    for (long attempt = 1; attempt <= budget; ++attempt) {
      DiscreteLineEnsemble L = free_bridges(rng);
      const double w = boltzmann_weight(L);
      if (w == 1.0 || uniform_open(rng) < w) return {std::move(L), attempt};
    }
    throw ResourceError("sample_ensemble_rejection: attempt budget exhausted");
  }

  // Resample L(i, m) from its full conditional.
  void site_update(DiscreteLineEnsemble& L, int i, int m, Rng& rng) const {
    const GridDensity& inc = law_->increment();
    const double h = inc.step();
    const int i0 = law_->support_lo(), i1 = law_->support_hi();
    const double left = L.at(i, m - 1), right = L.at(i, m + 1);
    const double lo_u = std::max(left + inc.x(i0), right - inc.x(i1));
    const double hi_u = std::min(left + inc.x(i1), right - inc.x(i0));
    int lo_idx = i0, hi_idx = i1;
    if (hi_u >= lo_u) {
      lo_idx = std::max(i0, static_cast<int>(std::floor((lo_u - left - inc.lo) / h)) - 1);
      hi_idx = std::min(i1, static_cast<int>(std::ceil((hi_u - left - inc.lo) / h)) + 1);
    }
    const std::size_t count = static_cast<std::size_t>(hi_idx - lo_idx + 1);
    auto& s = scratch();
    s.weights.resize(count);
    s.energy.assign(count, 0.0);
    const double base = left + inc.x(lo_idx);
    detail::reversed_samples(inc, right - base, s.weights);

    // Bond m-1 to the curve above: H_{m-1}(u - L_{i-1}(m-1)).
    const Interaction& h_up = spec_.interaction.at(m - 1);
    const double above = curve_value(L, i - 1, m - 1);
    if (!h_up.is_zero() && above != kInf)
      for (std::size_t j = 0; j < count; ++j) s.energy[j] += h_up(base + static_cast<double>(j) * h - above);
    // Bond m to the curve below: H_m(L_{i+1}(m+1) - u).
    const Interaction& h_dn = spec_.interaction.at(m);
    const double below = curve_value(L, i + 1, m + 1);
    if (!h_dn.is_zero() && below != -kInf)
      for (std::size_t j = 0; j < count; ++j) s.energy[j] += h_dn(below - (base + static_cast<double>(j) * h));

    double e_min = kInf;
    for (std::size_t j = 0; j < count; ++j) {
      s.weights[j] *= inc.values[lo_idx + j];
      if (s.weights[j] > 0.0) e_min = std::min(e_min, s.energy[j]);
    }
    if (e_min == kInf) throw PrecisionError("Gibbs conditional density numerically zero on grid");
    for (std::size_t j = 0; j < count; ++j) s.weights[j] *= std::exp(e_min - s.energy[j]);
    L.at(i, m) = sample_from_weights(s.weights, base, h, uniform_open(rng), s.cum);
  }

  void mcmc_sweep(DiscreteLineEnsemble& L, Rng& rng) const {
    for (int i = spec_.k1; i <= spec_.k2; ++i)
      for (int m = spec_.a + 1; m < spec_.b; ++m) site_update(L, i, m, rng);
  }

  // Systematic-scan Gibbs sampler started from `init`, or from free bridges.
  DiscreteLineEnsemble sample_mcmc(int sweeps, Rng& rng, const DiscreteLineEnsemble* init = nullptr) const {
    detail::require(sweeps >= 1, "sample_ensemble_mcmc: sweeps must be >= 1");
    DiscreteLineEnsemble L = init ? *init : free_bridges(rng);
    check_shape(L);
    for (int s = 0; s < sweeps; ++s) mcmc_sweep(L, rng);
    return L;
  }

  // Spec for resampling `box` of L given everything outside it.
  EnsembleSpec conditional_spec(const DiscreteLineEnsemble& L, const SubBox& box) const {
    detail::require(box.i1 >= spec_.k1 && box.i1 <= box.i2 && box.i2 <= spec_.k2, "SubBox: curve range outside ensemble");
    detail::require(box.c >= spec_.a && box.c < box.d && box.d <= spec_.b, "SubBox: time range outside ensemble");
    EnsembleSpec s;
    s.k1 = box.i1;
    s.k2 = box.i2;
    s.a = box.c;
    s.b = box.d;
    s.hrw = spec_.hrw;
    s.interaction = spec_.interaction.restrict_to(box.c, box.d);
    for (int i = box.i1; i <= box.i2; ++i) {
      s.x.push_back(L.at(i, box.c));
      s.y.push_back(L.at(i, box.d));
    }
    for (int m = box.c; m <= box.d; ++m) {
      s.f.push_back(curve_value(L, box.i1 - 1, m));
      s.g.push_back(curve_value(L, box.i2 + 1, m));
    }
    s.validate();
    return s;
  }

  // Replace `box` of L by an exact draw from its conditional law.
  void resample_box(DiscreteLineEnsemble& L, const SubBox& box, Rng& rng, long budget = kDefaultAttemptBudget) const {
    const GibbsModel sub(conditional_spec(L, box), law_);
    const RejectionDraw draw = sub.sample_rejection(rng, budget);
    for (int i = box.i1; i <= box.i2; ++i)
      for (int m = box.c + 1; m < box.d; ++m) L.at(i, m) = draw.ensemble.at(i, m);
  }

 private:
  struct Scratch {
    std::vector<double> weights;
    std::vector<double> energy;
    std::vector<double> cum;
  };
  static Scratch& scratch() {
    thread_local Scratch s;
    return s;
  }

  void check_shape(const DiscreteLineEnsemble& L) const {
    if (L.first_curve() != spec_.k1 || L.curves() != spec_.curves() || L.T0() != spec_.a || L.T1() != spec_.b)
      throw DomainError("Gibbs: ensemble dimensions do not match the EnsembleSpec");
  }

  EnsembleSpec spec_;
  std::shared_ptr<const BridgeLaw> law_;
};

inline AcceptanceEstimate acceptance_probability(const EnsembleSpec& spec, int n_mc, Rng& rng) {
  return GibbsModel(spec).acceptance_probability(n_mc, rng);
}

inline RejectionDraw sample_ensemble_rejection(const EnsembleSpec& spec, Rng& rng, long budget = kDefaultAttemptBudget) {
  return GibbsModel(spec).sample_rejection(rng, budget);
}

inline DiscreteLineEnsemble sample_ensemble_mcmc(const EnsembleSpec& spec, int sweeps, Rng& rng) {
  return GibbsModel(spec).sample_mcmc(sweeps, rng);
}

// Draws 2n exact samples of the full ensemble; the second half has `box`
// resampled from its conditional law given the rest. Probe marginals (each
// box curve at three interior times) of the untouched first half and the
// resampled second half are compared by two-sample KS. With `partial` the
// box may not contain the bottom curve k2.
inline StatReport gibbs_invariance_check(const GibbsModel& model, const SubBox& box, int n_samples, Rng& rng,
                                         bool partial = true) {
  const EnsembleSpec& spec = model.spec();
  detail::require(n_samples >= 10, "gibbs_invariance_check: need at least 10 samples");
  detail::require(box.d - box.c >= 2, "gibbs_invariance_check: box needs an interior time");
  if (partial && box.i2 >= spec.k2) throw DomainError("gibbs_invariance_check: partial property excludes the bottom curve");
  detail::require(box.i1 >= spec.k1 && box.i2 <= spec.k2 && box.c >= spec.a && box.d <= spec.b,
                  "gibbs_invariance_check: box outside ensemble");

  std::vector<int> probe_times;
  const int span = box.d - box.c;
  for (int q = 1; q <= 3; ++q) probe_times.push_back(box.c + std::max(1, std::min(span - 1, q * span / 4)));
  probe_times.erase(std::unique(probe_times.begin(), probe_times.end()), probe_times.end());

  std::vector<DiscreteLineEnsemble> reference, resampled;
  double attempts = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    auto r = model.sample_rejection(rng);
    attempts += static_cast<double>(r.attempts);
    reference.push_back(std::move(r.ensemble));
  }
  for (int s = 0; s < n_samples; ++s) {
    auto r = model.sample_rejection(rng);
    attempts += static_cast<double>(r.attempts);
    model.resample_box(r.ensemble, box, rng);
    resampled.push_back(std::move(r.ensemble));
  }

  StatReport report;
  const double crit = ks_critical_value_1pct(n_samples, n_samples);
  double worst = 0.0;
  for (int i = box.i1; i <= box.i2; ++i)
    for (int m : probe_times) {
      std::vector<double> pre, post;
      for (const auto& L : reference) pre.push_back(L.at(i, m));
      for (const auto& L : resampled) post.push_back(L.at(i, m));
      const double ks = ks_distance(EmpiricalCDF(std::move(pre)), EmpiricalCDF(std::move(post)));
      worst = std::max(worst, ks);
      report.add("ks_i" + std::to_string(i) + "_t" + std::to_string(m), ks);
    }
  report.add("max_ks", worst);
  report.add("ks_critical_1pct", crit);
  report.add("rejected", worst > crit ? 1.0 : 0.0);
  report.add("mean_attempts", attempts / (2.0 * n_samples));
  return report;
}

inline StatReport gibbs_invariance_check(const EnsembleSpec& spec, const SubBox& box, int n_samples, Rng& rng,
                                         bool partial = true) {
  return gibbs_invariance_check(GibbsModel(spec), box, n_samples, rng, partial);
}

}  // namespace lgle
