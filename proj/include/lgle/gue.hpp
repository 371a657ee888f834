#pragma once

// Empirical Tracy-Widom GUE reference from the largest eigenvalue of GUE
// matrices: diagonal N(0,1), off-diagonal complex with N(0,1/2) real and
// imaginary parts, edge-rescaled as M^{1/6} (lambda_max - 2 sqrt(M)).

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "lgle/empirical.hpp"
#include "lgle/errors.hpp"
#include "lgle/rng.hpp"

namespace lgle {

inline double gue_edge_sample(int M, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double half = std::sqrt(0.5);
  Eigen::MatrixXcd H(M, M);
  for (int i = 0; i < M; ++i) {
    H(i, i) = normal(rng);
    for (int j = i + 1; j < M; ++j) {
      const double re = half * normal(rng), im = half * normal(rng);
      H(j, i) = {re, im};
      H(i, j) = {re, -im};
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InternalError("gue_tw_oracle: eigensolver failed");
  const double lmax = solver.eigenvalues().maxCoeff();
  return std::pow(static_cast<double>(M), 1.0 / 6.0) * (lmax - 2.0 * std::sqrt(static_cast<double>(M)));
}

inline EmpiricalCDF gue_tw_oracle(int M, int n_samples, Rng& rng) {
  detail::require(M >= 50, "gue_tw_oracle: matrix size must be >= 50");
  detail::require(n_samples >= 1, "gue_tw_oracle: need at least one sample");
  std::vector<double> x(static_cast<std::size_t>(n_samples));
  for (auto& v : x) v = gue_edge_sample(M, rng);
  return EmpiricalCDF(std::move(x));
}

}  // namespace lgle
