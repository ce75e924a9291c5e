#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "xqr/margins.hpp"

using namespace xqr;

TEST(Threshold, NinetiethPercentileOfOneToTen) {
  std::vector<double> v{3, 1, 4, 10, 5, 9, 2, 6, 8, 7};
  const auto c = select_threshold(v, 0.9);
  EXPECT_EQ(c.threshold, 9.0);
  EXPECT_EQ(c.k, 1);
}

TEST(Threshold, TiesCountStrictExceedancesOnly) {
  std::vector<double> v{1, 2, 2, 3, 3, 4};
  const auto c = select_threshold(v, 0.5);
  EXPECT_EQ(c.threshold, 2.0);
  EXPECT_EQ(c.k, 3);
}

TEST(Threshold, Rejects) {
  std::vector<double> empty;
  EXPECT_THROW(select_threshold(empty, 0.9), std::invalid_argument);
  std::vector<double> v{1, 2, 3};
  EXPECT_THROW(select_threshold(v, 0.0), std::invalid_argument);
  EXPECT_THROW(select_threshold(v, 1.0), std::invalid_argument);
  std::vector<double> flat{5, 5, 5, 5};
  EXPECT_THROW(select_threshold(flat, 0.5), std::invalid_argument);
}

TEST(Threshold, KIsTenPercentOfFifteenHundred) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e;
  std::vector<double> v(1500);
  for (auto& x : v) x = e(rng);
  const auto s = make_censored_sample(v, 0.9);
  EXPECT_EQ(s.k, 150);
  EXPECT_DOUBLE_EQ(s.k_over_n(), 0.1);
}

TEST(Gev, TailDensityIsDerivativeOfPoweredCdf) {
  const GevParams th{2.0, 1.5, 0.7};
  for (double y : {1.0, 2.5, 4.0, 30.0}) {
    const double h = 1e-5 * (1.0 + std::abs(y));
    const double fd = (gev_cdf_power(y + h, th, 0.1) - gev_cdf_power(y - h, th, 0.1)) / (2 * h);
    EXPECT_NEAR(std::exp(gev_tail_logdensity(y, th, 0.1)), fd, 1e-7 * (1.0 + fd));
  }
}

TEST(Gev, OutsideSupport) {
  const GevParams th{0.0, 1.0, 0.5};  // lower edge at -2
  EXPECT_EQ(gev_cdf_power(-3.0, th, 0.1), 0.0);
  EXPECT_EQ(gev_log_cdf_power(-3.0, th, 0.1), -kInf);
  EXPECT_EQ(gev_tail_logdensity(-3.0, th, 0.1), -kInf);
  EXPECT_FALSE(marginal_transform(-3.0, th, 0.1).has_value());
}

TEST(Gev, QuantileInvertsTransform) {
  const GevParams th{3.0, 2.0, 1.2};
  for (double p : {1e-2, 1.0 / 750, 1.0 / 3000, 1e-7}) {
    const double q = extreme_quantile(p, th, 150, 1500);
    EXPECT_NEAR(*marginal_transform(q, th, 0.1) / p, 1.0, 1e-12);
  }
}

TEST(Gev, QuantileClosedForm) {
  // k/(np) = 2 and gamma = 1: Q = mu + sigma.
  EXPECT_DOUBLE_EQ(extreme_quantile(0.05, {1.0, 3.0, 1.0}, 10, 100), 4.0);
  EXPECT_THROW(extreme_quantile(0.0, {1.0, 3.0, 1.0}, 10, 100), std::invalid_argument);
}

TEST(Gev, RegressionLocation) {
  const MarginalModel m{2.0, 1.0, 0.5, 1.0, 0.3};
  EXPECT_DOUBLE_EQ(location_at(m, 4.0), 2.0 + 4.0 + 8.0);
  EXPECT_TRUE(m.has_regression());
  EXPECT_FALSE(MarginalModel::constant({1, 1, 1}).has_regression());
}

TEST(Gev, CheckRejectsNonPositive) {
  EXPECT_THROW(check_gev({0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(check_gev({0, 1, 0}), std::invalid_argument);
  EXPECT_NO_THROW(check_gev({0, 1, 0.1}));
}

TEST(Threshold, OneToHundred) {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = 100 - i;
  const auto c = select_threshold(v, 0.9);
  EXPECT_EQ(c.threshold, 90.0);
  EXPECT_EQ(c.k, 10);
}

TEST(Gev, UnitFrechetValues) {
  const GevParams th{0.0, 1.0, 1.0};
  EXPECT_NEAR(gev_cdf_power(0.0, th, 0.1), std::exp(-0.1), 1e-15);
  EXPECT_NEAR(gev_cdf_power(9.0, th, 0.1), std::exp(-0.01), 1e-15);
  EXPECT_NEAR(gev_tail_logdensity(9.0, th, 0.1), -0.01 + std::log(1e-3), 1e-13);
  EXPECT_NEAR(*marginal_transform(0.0, th, 0.1), 0.1, 1e-15);
  EXPECT_NEAR(*marginal_transform(9.0, th, 0.1), 0.01, 1e-15);
  // At p = k/n the quantile is the location.
  EXPECT_NEAR(extreme_quantile(0.1, {2.5, 1.7, 0.4}, 150, 1500), 2.5, 1e-14);
}

TEST(Gev, DensityMatchesDifferenceAtOneScaleAboveLocation) {
  const GevParams th{1.0, 2.0, 0.7};
  const double kn = 0.1, y = th.mu + th.sigma, h = 1e-5;
  const double fd = (gev_cdf_power(y + h, th, kn) - gev_cdf_power(y - h, th, kn)) / (2 * h);
  EXPECT_NEAR(std::exp(gev_tail_logdensity(y, th, kn)), fd, 1e-6);
}

TEST(Gev, LocationExamples) {
  EXPECT_EQ(location_at({5, 0, 0, 1, 1}, 100.0), 5.0);
  EXPECT_DOUBLE_EQ(location_at({1, 2, 3, 1, 1}, 2.0), 17.0);
  EXPECT_NEAR(location_at({1, -1, 0.5, 1, 1}, -6.3), 27.145, 1e-12);
}
