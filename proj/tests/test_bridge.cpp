#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lgle/bridge.hpp"
#include "stat_helpers.hpp"

using namespace lgle;

namespace {

double grid_cdf_at(const GridDensity& g, const std::vector<double>& cdf, double t) {
  if (t <= g.lo) return 0.0;
  if (t >= g.hi) return 1.0;
  const double pos = (t - g.lo) / g.step();
  const int i = std::min(static_cast<int>(pos), g.m() - 2);
  const double w = pos - i;
  return (1.0 - w) * cdf[i] + w * cdf[i + 1];
}

std::vector<double> column(const std::vector<std::vector<double>>& paths, int m) {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p[m]);
  return out;
}

}  // namespace

TEST(HrwSpec, LogGammaNormalisedWithGammaMoments) {
  for (double theta : {0.5, 1.0, 3.0}) {
    const HrwSpec h = HrwSpec::log_gamma(theta);
    EXPECT_NEAR(h.mean(), -digamma(theta), 1e-6);
    EXPECT_NEAR(h.variance(), trigamma(theta), 1e-6);
  }
}

TEST(HrwSpec, RejectsBadInput) {
  EXPECT_THROW(HrwSpec::log_gamma(0.0), DomainError);
  EXPECT_THROW(HrwSpec::gaussian_test(-1.0), DomainError);
  EXPECT_THROW(HrwSpec::tabulated(0.0, 1.0, {0.0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(HrwSpec::tabulated(0.0, 1.0, {1.0, -1.0, 1.0}), DomainError);
}

TEST(HrwSpec, TabulatedIsNormalised) {
  std::vector<double> tri;
  for (int i = 0; i <= 200; ++i) tri.push_back(100.0 - std::abs(i - 100.0));
  const HrwSpec h = HrwSpec::tabulated(-1.0, 1.0, tri);
  EXPECT_NEAR(h.mean(), 0.0, 1e-6);
  const GridDensity g = hrw_density(h, 1024);
  EXPECT_NEAR(g.mass(), 1.0, 1e-12);
}

TEST(HrwDensity, PositiveInteriorUnitMassAndMean) {
  const GridDensity g = hrw_density(HrwSpec::log_gamma(1.0));
  EXPECT_EQ(g.m(), kDefaultGridPoints);
  EXPECT_NEAR(g.mass(), 1.0, 1e-6);
  // Nodes where G is representable as a normal double carry positive values;
  // far into the doubly exponential left tail G underflows to zero.
  const HrwSpec h = HrwSpec::log_gamma(1.0);
  int positive = 0;
  for (int i = 1; i + 1 < g.m(); ++i) {
    if (h.log_density(g.x(i)) > std::log(std::numeric_limits<double>::min())) {
      EXPECT_GT(g.values[i], 0.0);
      ++positive;
    }
  }
  EXPECT_GT(positive, g.m() / 2);
  EXPECT_NEAR(0.5 * (g.lo + g.hi), -digamma(1.0), 1e-12);
}

TEST(HrwDensity, GridCdfMatchesNegLogGammaLaw) {
  // P(-log G <= x) = P(G >= e^{-x}) = 1 - P(theta, e^{-x}).
  for (double theta : {0.7, 1.0, 2.5}) {
    const GridDensity g = hrw_density(HrwSpec::log_gamma(theta));
    const auto cdf = g.cdf();
    double worst = 0.0;
    for (int i = 0; i < g.m(); i += 7) worst = std::max(worst, std::abs(cdf[i] - (1.0 - test::gamma_cdf(theta, std::exp(-g.x(i))))));
    EXPECT_LT(worst, 1e-4) << theta;
  }
}

TEST(HrwDensity, ExpOfIncrementIsGammaByKs) {
  const GridDensity g = hrw_density(HrwSpec::log_gamma(1.0));
  const auto cdf = g.cdf();
  Rng rng(2);
  std::vector<double> u;
  for (int s = 0; s < 10000; ++s) u.push_back(std::exp(-inverse_cdf(cdf, g.lo, g.step(), uniform_open(rng))));
  EXPECT_LT(test::ks_one_sample(u, [](double t) { return test::gamma_cdf(1.0, t); }), 0.02);
}

TEST(NStepDensity, IdentityMeanAndVariance) {
  const HrwSpec h = HrwSpec::log_gamma(1.0);
  const GridDensity g = hrw_density(h);
  const GridDensity g1 = n_step_density(g, 1);
  EXPECT_EQ(g1.values, g.values);
  for (int n : {2, 5, 9}) {
    const GridDensity gn = n_step_density(g, n);
    EXPECT_NEAR(gn.mass(), 1.0, 1e-6);
    EXPECT_NEAR(gn.mean(), n * g.mean(), 1e-6 * n);
    EXPECT_NEAR(gn.variance(), n * g.variance(), 1e-5 * n);
    EXPECT_NEAR(gn.step(), g.step(), 1e-12);
  }
  EXPECT_THROW(n_step_density(g, 0), DomainError);
  EXPECT_THROW(n_step_density(g, 50, 100.0), ResourceError);
}

TEST(NStepDensity, GaussianConvolutionIsExact) {
  const GridDensity g = hrw_density(HrwSpec::gaussian_test(1.0));
  const GridDensity g4 = n_step_density(g, 4);
  for (double t : {-3.0, -1.0, 0.0, 0.5, 2.0})
    EXPECT_NEAR(g4.value_at(t), std::exp(-t * t / 8.0) / std::sqrt(8.0 * std::numbers::pi), 1e-6);
}

TEST(BridgeSequential, SingleStepIsDeterministic) {
  Rng rng(1);
  const BridgeSpec spec{3, 4, 1.25, -0.5, HrwSpec::log_gamma(1.0)};
  const auto p = sample_bridge_sequential(spec, rng);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], 1.25);
  EXPECT_EQ(p[1], -0.5);
  EXPECT_THROW(sample_bridge_sequential(BridgeSpec{2, 2, 0.0, 0.0, HrwSpec::log_gamma(1.0)}, rng), DomainError);
}

class BridgeLawFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    law_ = new BridgeLaw(HrwSpec::log_gamma(1.0), 9);
    spec_ = new BridgeSpec{0, 10, 0.3, 7.1, HrwSpec::log_gamma(1.0)};
    Rng rng(17);
    seq_ = new std::vector<std::vector<double>>();
    for (int s = 0; s < 10000; ++s) seq_->push_back(sample_bridge_sequential(*law_, *spec_, rng));
  }
  static void TearDownTestSuite() {
    delete law_;
    delete spec_;
    delete seq_;
  }
  static BridgeLaw* law_;
  static BridgeSpec* spec_;
  static std::vector<std::vector<double>>* seq_;
};
BridgeLaw* BridgeLawFixture::law_ = nullptr;
BridgeSpec* BridgeLawFixture::spec_ = nullptr;
std::vector<std::vector<double>>* BridgeLawFixture::seq_ = nullptr;

TEST_F(BridgeLawFixture, EndpointsPinnedBitwise) {
  for (const auto& p : *seq_) {
    EXPECT_EQ(p.front(), spec_->x);
    EXPECT_EQ(p.back(), spec_->y);
  }
}

TEST_F(BridgeLawFixture, LinearMeanAtEveryInteriorTime) {
  for (int m = 1; m < 10; ++m) {
    const auto [mean, se] = test::mean_and_se(column(*seq_, m));
    EXPECT_LE(std::abs(mean - (spec_->x + m * (spec_->y - spec_->x) / 10.0)), 4.0 * se) << m;
  }
}

TEST_F(BridgeLawFixture, MidpointMatchesQuadrature) {
  const GridDensity q = bridge_marginal_density(*law_, *spec_, 5);
  const auto cdf = q.cdf();
  const double ks = test::ks_one_sample(column(*seq_, 5), [&](double t) { return grid_cdf_at(q, cdf, t); });
  EXPECT_LT(ks, 0.02);
}

TEST_F(BridgeLawFixture, OneMcmcSweepPreservesLaw) {
  Rng rng(99);
  std::vector<std::vector<double>> moved;
  for (const auto& p : *seq_) moved.push_back(sample_bridge_mcmc(*law_, *spec_, 1, rng, p));
  for (const auto& p : moved) {
    EXPECT_EQ(p.front(), spec_->x);
    EXPECT_EQ(p.back(), spec_->y);
  }
  for (int m : {2, 5, 8}) EXPECT_LT(test::ks_two_sample(column(*seq_, m), column(moved, m)), 0.02) << m;
}

TEST_F(BridgeLawFixture, McmcMatchesSequential) {
  Rng rng(123);
  std::vector<std::vector<double>> chains;
  for (int s = 0; s < 10000; ++s) chains.push_back(sample_bridge_mcmc(*law_, *spec_, 200, rng));
  EXPECT_LT(test::ks_two_sample(column(*seq_, 5), column(chains, 5)), 0.02);
}

TEST(BridgeShift, ShiftInvarianceInDistribution) {
  const BridgeLaw law(HrwSpec::log_gamma(1.0), 5);
  const BridgeSpec a{0, 6, 0.0, 2.0, law.hrw()};
  const BridgeSpec b{10, 16, -3.0, -1.0, law.hrw()};
  Rng r1(4), r2(5);
  std::vector<double> xa, xb;
  for (int s = 0; s < 5000; ++s) {
    xa.push_back(sample_bridge_sequential(law, a, r1)[2]);
    xb.push_back(sample_bridge_sequential(law, b, r2)[2] + 3.0);
  }
  EXPECT_LT(test::ks_two_sample(xa, xb), test::ks_critical_two_sample(xa.size(), xb.size(), 0.01));
}

TEST(BridgeGrid, RefinementStability) {
  const BridgeSpec spec{0, 6, 0.0, 3.0, HrwSpec::log_gamma(1.0)};
  const BridgeLaw coarse(spec.hrw, 5, 4096), fine(spec.hrw, 5, 8192);
  const GridDensity qc = bridge_marginal_density(coarse, spec, 3);
  const GridDensity qf = bridge_marginal_density(fine, spec, 3);
  const auto cc = qc.cdf(), cf = qf.cdf();
  double worst = 0.0;
  for (int i = 0; i < qf.m(); ++i) worst = std::max(worst, std::abs(grid_cdf_at(qc, cc, qf.x(i)) - cf[i]));
  EXPECT_LE(worst, 1e-4);
}

TEST(BridgeMcmc, GaussianMidpointVariance) {
  // For Gaussian increments the bridge midpoint has variance T/4 at T steps.
  const BridgeLaw law(HrwSpec::gaussian_test(1.0), 1, 2048);
  const BridgeSpec spec{0, 4, 0.0, 0.0, law.hrw()};
  Rng rng(8);
  std::vector<double> mid;
  for (int s = 0; s < 4000; ++s) mid.push_back(sample_bridge_mcmc(law, spec, 30, rng)[2]);
  const double ks = test::ks_one_sample(mid, [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); });
  EXPECT_LT(ks, test::ks_critical_one_sample(mid.size(), 0.01));
}
