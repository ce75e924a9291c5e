#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "xqr/testbeds.hpp"

using namespace xqr;

namespace {

const Testbed kBivariate[] = {Testbed::cauchy2, Testbed::trunc_t2, Testbed::asymmetric, Testbed::clover};

// P(X1 > a, X2 > b) by nested quadrature of the joint density, with
// x = a + t / (1 - t) on each axis.
double joint_survival(const TestbedSpec& s, double a, double b) {
  const QuadratureOptions opt{1e-9, 1e-14, 4000};
  auto inner = [&](double x1) {
    auto f = [&](double t) {
      const double x2 = b + t / (1 - t);
      return bivariate_density(s, x1, x2) / ((1 - t) * (1 - t));
    };
    return integrate_or_throw(f, 0.0, 1.0, opt, "inner");
  };
  auto outer = [&](double t) { return inner(a + t / (1 - t)) / ((1 - t) * (1 - t)); };
  return integrate_or_throw(outer, 0.0, 1.0, opt, "outer");
}

}  // namespace

TEST(Univariate, LogQuantilesAgreeWithReferenceValues) {
  const double p[] = {1.0 / 750, 1.0 / 1500, 1.0 / 3000};
  const double frechet[] = {19.86, 21.94, 24.02};
  const double half_t[] = {18.73, 20.81, 22.89};
  const double inv_gamma[] = {13.48, 14.87, 16.25};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::log(true_univariate_quantile(TestbedSpec::of(Testbed::frechet), p[i])), frechet[i], 0.01);
    EXPECT_NEAR(std::log(true_univariate_quantile(TestbedSpec::of(Testbed::half_t), p[i])), half_t[i], 0.01);
    EXPECT_NEAR(std::log(true_univariate_quantile(TestbedSpec::of(Testbed::inv_gamma), p[i])), inv_gamma[i], 0.01);
  }
}

TEST(Univariate, ClosedForms) {
  // Half-Cauchy (dof 1): P(|T| > x) = 1 - 2 atan(x) / pi.
  auto s = TestbedSpec::of(Testbed::half_t);
  s.dof = 1.0;
  EXPECT_NEAR(true_univariate_quantile(s, 0.5), 1.0, 1e-12);
  // Inverse gamma with shape 1/2 is 1 / (Z^2 / 2): P(X > x) = P(|Z| < sqrt(2/x)).
  const auto ig = TestbedSpec::of(Testbed::inv_gamma);
  const double x = true_univariate_quantile(ig, 0.01);
  EXPECT_NEAR(2 * normal_cdf(std::sqrt(2 / x)) - 1, 0.01, 1e-12);
}

TEST(Univariate, SamplersHitTheirQuantiles) {
  for (auto t : {Testbed::frechet, Testbed::half_t, Testbed::inv_gamma}) {
    const auto s = TestbedSpec::of(t);
    std::mt19937_64 rng(31);
    const auto x = sample_univariate(s, 200000, rng);
    for (double p : {0.5, 0.1, 0.01}) {
      const double q = true_univariate_quantile(s, p);
      double above = 0;
      for (double v : x) above += v > q;
      const double se = std::sqrt(p * (1 - p) / x.size());
      EXPECT_NEAR(above / x.size(), p, 4 * se) << to_string(t) << " p = " << p;
    }
  }
}

TEST(Bivariate, AngularDensitiesHaveUnitMassAndHalfMean) {
  const QuadratureOptions opt{1e-11, 1e-14, 5000};
  for (auto t : kBivariate) {
    const auto s = TestbedSpec::of(t);
    auto h = [&](double w) { return w > 0 && w < 1 ? true_angular_density(s, w) : 0.0; };
    auto wh = [&](double w) { return w * h(w); };
    EXPECT_NEAR(integrate_or_throw(h, 0.0, 1.0, opt, "mass"), 1.0, 1e-6) << to_string(t);
    EXPECT_NEAR(integrate_or_throw(wh, 0.0, 1.0, opt, "mean"), 0.5, 1e-6) << to_string(t);
  }
}

TEST(Bivariate, CauchyQStar) {
  const auto s = TestbedSpec::of(Testbed::cauchy2);
  for (double w : {0.1, 0.5, 0.77}) EXPECT_NEAR(true_q_star(s, w), std::hypot(w, 1 - w), 1e-14);
}

TEST(Bivariate, DensitiesIntegrateToOne) {
  for (auto t : kBivariate) EXPECT_NEAR(joint_survival(TestbedSpec::of(t), 0.0, 0.0), 1.0, 1e-6) << to_string(t);
}

TEST(Bivariate, SurvivalMatchesDensity) {
  for (auto t : kBivariate) {
    const auto s = TestbedSpec::of(t);
    for (int which : {1, 2}) {
      const double y = 2.5;
      EXPECT_NEAR(true_marginal_survival(s, which, y),
                  which == 1 ? joint_survival(s, y, 0.0) : joint_survival(s, 0.0, y), 1e-7)
          << to_string(t) << " margin " << which;
    }
  }
}

TEST(Bivariate, QuantileInvertsSurvival) {
  for (auto t : kBivariate) {
    const auto s = TestbedSpec::of(t);
    for (int which : {1, 2})
      for (double p : {0.3, 1e-3, 1.0 / 3000 / 2.6})
        EXPECT_NEAR(true_marginal_survival(s, which, true_marginal_quantile(s, which, p)) / p, 1.0, 1e-9);
  }
}

TEST(Bivariate, SamplersMatchJointAndMarginalSurvival) {
  const int n = 200000;
  for (auto t : kBivariate) {
    const auto s = TestbedSpec::of(t);
    std::mt19937_64 rng(41);
    const auto [x1, x2] = sample_bivariate(s, n, rng);
    const double a = true_marginal_quantile(s, 1, 0.2), b = true_marginal_quantile(s, 2, 0.2);
    double both = 0, first = 0, second = 0;
    for (int i = 0; i < n; ++i) {
      ASSERT_GE(x1[i], 0.0);
      ASSERT_GE(x2[i], 0.0);
      first += x1[i] > a;
      second += x2[i] > b;
      both += x1[i] > a && x2[i] > b;
    }
    const double pj = joint_survival(s, a, b);
    EXPECT_NEAR(first / n, 0.2, 4 * std::sqrt(0.16 / n)) << to_string(t);
    EXPECT_NEAR(second / n, 0.2, 4 * std::sqrt(0.16 / n)) << to_string(t);
    EXPECT_NEAR(both / n, pj, 4 * std::sqrt(pj * (1 - pj) / n)) << to_string(t);
  }
}

TEST(Bivariate, TailIndices) {
  EXPECT_EQ(TestbedSpec::of(Testbed::trunc_t2).tail_indices()[0], 0.5);
  EXPECT_EQ(TestbedSpec::of(Testbed::asymmetric).tail_indices()[1], 0.6);
  EXPECT_EQ(TestbedSpec::of(Testbed::clover).tail_indices()[1], 1.25);
}

TEST(ExtremalT, SymmetryHomogeneityAndMargins) {
  for (double rho : {0.0, 0.5, 0.9})
    for (double nu : {1.0, 2.0, 4.5})
      for (auto [x, y] : {std::pair{0.5, 2.0}, std::pair{1.0, 1.0}, std::pair{3.0, 0.2}}) {
        const double v = extremal_t_exponent(x, y, rho, nu);
        EXPECT_NEAR(extremal_t_exponent(y, x, rho, nu), v, 1e-12);
        EXPECT_NEAR(extremal_t_exponent(2.5 * x, 2.5 * y, rho, nu), v / 2.5, 1e-12);
        EXPECT_GE(v, std::max(1 / x, 1 / y) - 1e-12);
        EXPECT_LE(v, 1 / x + 1 / y + 1e-12);
      }
  EXPECT_NEAR(extremal_t_exponent(2.0, 1e12, 0.5, 2.0), 0.5, 1e-6);
}

TEST(ExtremalT, QuadratureIdentityWithTruncatedTDensity) {
  const auto s = TestbedSpec::of(Testbed::trunc_t2);
  const QuadratureOptions opt{1e-12, 1e-15, 5000};
  for (auto [x, y] : {std::pair{0.5, 2.0}, std::pair{1.0, 1.0}, std::pair{3.0, 0.2}}) {
    auto f = [&](double w) {
      if (!(w > 0 && w < 1)) return 0.0;
      return 2 * std::max(w / x, (1 - w) / y) * true_angular_density(s, w);
    };
    const double split = x / (x + y);  // kink of the max
    const double v = integrate_or_throw(f, 0.0, split, opt, "V") + integrate_or_throw(f, split, 1.0, opt, "V");
    EXPECT_NEAR(extremal_t_exponent(x, y, s.rho, s.nu), v, 1e-7);
  }
}

TEST(ExtremalT, PartialDerivativeVanishesAsYShrinks) {
  auto dvdx = [](double y) {
    const double h = 1e-4;
    return (extremal_t_exponent(1 + h, y, 0.5, 2.0) - extremal_t_exponent(1 - h, y, 0.5, 2.0)) / (2 * h);
  };
  double prev = std::abs(dvdx(1.0));
  for (double y = 0.5; y > 1e-6; y *= 0.5) {
    const double d = std::abs(dvdx(y));
    EXPECT_LT(d, prev) << "y = " << y;
    prev = d;
  }
  EXPECT_LT(prev, 2e-3);
}

TEST(TrueRegions, CauchyClosedForm) {
  const auto s = TestbedSpec::of(Testbed::cauchy2);
  const auto grid = default_w_grid(9);
  const std::vector<double> probs{1.0 / 750};
  const auto tr = true_regions(s, grid, probs);
  EXPECT_NEAR(tr.nu, 1 + std::numbers::pi / 2, 1e-8);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = tr.basic_set[i].x;
    // P(X > y) = 1 - 2 atan(y) / pi, so y = cot(pi q / 2).
    const double q = probs[0] / (tr.nu * x);
    EXPECT_NEAR(tr.regions[0][i].x, 1 / std::tan(std::numbers::pi * q / 2), 1e-8 * tr.regions[0][i].x);
  }
}

TEST(Testbeds, ParseNames) {
  EXPECT_EQ(parse_testbed("trunc-t"), Testbed::trunc_t2);
  EXPECT_STREQ(to_string(Testbed::inv_gamma), "inv-gamma");
  EXPECT_THROW(parse_testbed("gumbel"), std::invalid_argument);
  EXPECT_THROW(true_univariate_quantile(TestbedSpec::of(Testbed::cauchy2), 0.1), std::invalid_argument);
}

TEST(Univariate, NamedLogQuantilesToHalfPercent) {
  EXPECT_NEAR(std::log(true_univariate_quantile(TestbedSpec::of(Testbed::frechet), 1.0 / 1500)), 21.94, 0.005);
  EXPECT_NEAR(std::log(true_univariate_quantile(TestbedSpec::of(Testbed::half_t), 1.0 / 750)), 18.73, 0.005);
}

TEST(Univariate, MedianSplitsLargeSample) {
  std::mt19937_64 rng(77);
  const int n = 1000000;
  for (auto t : {Testbed::frechet, Testbed::half_t, Testbed::inv_gamma}) {
    const auto s = TestbedSpec::of(t);
    const double median = true_univariate_quantile(s, 0.5);
    const auto x = sample_univariate(s, n, rng);
    const double above = std::count_if(x.begin(), x.end(), [&](double v) { return v > median; });
    EXPECT_NEAR(above / n, 0.5, 3 * std::sqrt(0.25 / n)) << to_string(t);
  }
}

TEST(Bivariate, CauchyAngularDensityAtHalf) {
  EXPECT_NEAR(true_angular_density(TestbedSpec::of(Testbed::cauchy2), 0.5), std::sqrt(2.0), 1e-14);
}

TEST(Bivariate, TruncatedTQStarAtHalf) {
  // Closed-form q* at nu = 2, rho = 1/2, evaluated independently of h.
  EXPECT_NEAR(true_q_star(TestbedSpec::of(Testbed::trunc_t2), 0.5), 0.49315304861610415, 1e-10);
}

TEST(Bivariate, TruncatedTWithOneDofAndNoCorrelationIsCauchy) {
  auto t = TestbedSpec::of(Testbed::trunc_t2);
  t.nu = 1.0;
  t.rho = 0.0;
  const int n = 10000;
  std::mt19937_64 rng(91);
  auto radii = [&](const TestbedSpec& s) {
    auto [a, b] = sample_bivariate(s, n, rng);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = std::hypot(a[i], b[i]);
    std::sort(r.begin(), r.end());
    return r;
  };
  const auto r1 = radii(t), r2 = radii(TestbedSpec::of(Testbed::cauchy2));
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < r1.size() && j < r2.size()) {
    if (r1[i] <= r2[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) - double(j)) / n);
  }
  EXPECT_LT(d, 1.628 * std::sqrt(2.0 / n));
  for (double w : {0.2, 0.5, 0.9})
    EXPECT_NEAR(true_angular_density(t, w), true_angular_density(TestbedSpec::of(Testbed::cauchy2), w), 1e-12);
}

TEST(Nu, InsensitiveToQuadratureRefinement) {
  for (auto t : kBivariate) {
    const auto s = TestbedSpec::of(t);
    const auto g = s.tail_indices();
    auto h = [&](double w) { return true_angular_density(s, w); };
    for (auto c : {NuConvention::radius_weighted, NuConvention::exponent_measure}) {
      const double coarse = nu_S(h, g[0], g[1], c, QuadratureOptions{1e-8, 1e-14, 4000});
      const double fine = nu_S(h, g[0], g[1], c, QuadratureOptions{1e-12, 1e-16, 20000});
      EXPECT_LT(std::abs(coarse - fine), 1e-6) << to_string(t);
    }
  }
}
