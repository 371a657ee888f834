#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lgle/errors.hpp"

namespace lgle {

// Curves L_i(j) for i in [first_curve, first_curve + K) and integer times
// j in [T0, T1]. Non-integer times are evaluated by linear interpolation.
class DiscreteLineEnsemble {
 public:
  DiscreteLineEnsemble() = default;

  DiscreteLineEnsemble(int K, int T0, int T1, int first_curve = 1)
      : K_(K), T0_(T0), T1_(T1), first_(first_curve) {
    detail::require(K >= 1, "DiscreteLineEnsemble: need at least one curve");
    detail::require(T0 < T1, "DiscreteLineEnsemble: need T0 < T1");
    values_.assign(static_cast<std::size_t>(K) * width(), 0.0);
  }

  int curves() const { return K_; }
  int T0() const { return T0_; }
  int T1() const { return T1_; }
  int first_curve() const { return first_; }
  int last_curve() const { return first_ + K_ - 1; }
  int width() const { return T1_ - T0_ + 1; }

  double& at(int i, int j) { return values_[offset(i, j)]; }
  double at(int i, int j) const { return values_[offset(i, j)]; }

  std::span<double> curve(int i) { return {values_.data() + offset(i, T0_), static_cast<std::size_t>(width())}; }
  std::span<const double> curve(int i) const {
    return {values_.data() + offset(i, T0_), static_cast<std::size_t>(width())};
  }

  // Linear interpolation between adjacent integer times; exact at integers.
  double eval(int i, double s) const {
    if (!(s >= T0_ && s <= T1_)) throw DomainError("DiscreteLineEnsemble::eval: time outside [T0, T1]");
    const double fl = std::floor(s);
    const int j = static_cast<int>(fl);
    if (j == T1_ || s == fl) return at(i, j);
    const double t = s - fl;
    return (1.0 - t) * at(i, j) + t * at(i, j + 1);
  }

  const std::vector<double>& data() const { return values_; }

  friend bool operator==(const DiscreteLineEnsemble&, const DiscreteLineEnsemble&) = default;

 private:
  std::size_t offset(int i, int j) const {
    if (i < first_ || i > last_curve() || j < T0_ || j > T1_)
      throw DomainError("DiscreteLineEnsemble: index out of range");
    return static_cast<std::size_t>(i - first_) * width() + static_cast<std::size_t>(j - T0_);
  }

  int K_ = 0;
  int T0_ = 0;
  int T1_ = 1;
  int first_ = 1;
  std::vector<double> values_;
};

}  // namespace lgle
