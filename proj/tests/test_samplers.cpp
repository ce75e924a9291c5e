#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "xqr/samplers.hpp"
#include "xqr/testbeds.hpp"

using namespace xqr;

namespace {

double batch_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t len = x.size() / batches;
  std::vector<double> m(batches, 0.0);
  double grand = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) m[b] += x[b * len + i];
    m[b] /= len;
    grand += m[b] / batches;
  }
  double ss = 0.0;
  for (double v : m) ss += (v - grand) * (v - grand);
  return std::sqrt(ss / (batches - 1.0) / batches);
}

}  // namespace

TEST(Adaptation, SteplengthConstant) {
  EXPECT_NEAR(robbins_monro_steplength(0.234), 2.1381251189733765, 1e-10);
}

TEST(Adaptation, GainSchedules) {
  AdaptationConfig c;
  EXPECT_DOUBLE_EQ(adaptation_gain(c, 2, 3), 1.0);
  EXPECT_NEAR(adaptation_gain(c, 3000, 3), std::pow(1000.0, -0.6), 1e-15);
  c.gain = AdaptationGain::harmonic;
  EXPECT_DOUBLE_EQ(adaptation_gain(c, 40, 3), 1.0 / 40);
  c.gain = AdaptationGain::constant;
  EXPECT_DOUBLE_EQ(adaptation_gain(c, 40000, 3), 1.0);
  EXPECT_EQ(parse_adaptation_gain("harmonic"), AdaptationGain::harmonic);
  EXPECT_THROW(parse_adaptation_gain("linear"), std::invalid_argument);
}

TEST(Rwmh, CovarianceIsRunningHistoryCovariance) {
  Rng rng(3);
  auto target = [](const Vector& v) { return -0.5 * v.squaredNorm(); };
  Vector x0 = Vector::Zero(2);
  auto s = RwmhState::start(x0, target(x0));
  std::vector<Vector> hist;
  for (int i = 0; i < 400; ++i) {
    rwmh_step(s, target, rng);
    hist.push_back(s.theta);
  }
  Vector mean = Vector::Zero(2);
  for (const auto& h : hist) mean += h / hist.size();
  Matrix cov = Matrix::Zero(2, 2);
  for (const auto& h : hist) cov += (h - mean) * (h - mean).transpose() / (hist.size() - 1.0);
  EXPECT_LT((s.running_mean - mean).norm(), 1e-12);
  EXPECT_LT((s.comoment / (hist.size() - 1.0) - cov).norm(), 1e-12);
}

TEST(Rwmh, IdentityPhase) {
  Rng rng(3);
  auto target = [](const Vector& v) { return -0.5 * v.squaredNorm(); };
  Vector x0 = Vector::Zero(3);
  auto s = RwmhState::start(x0, target(x0));
  for (int i = 0; i < 50; ++i) rwmh_step(s, target, rng);
  // Sigma uses the scale in force before its own update.
  EXPECT_NEAR(s.sigma(0, 1), 0.0, 0.0);
  EXPECT_GT(s.sigma(0, 0), 1.0);
}

TEST(Rwmh, RejectsNonFiniteStart) {
  EXPECT_THROW(RwmhState::start(Vector::Zero(2), -kInf), std::invalid_argument);
}

TEST(Rwmh, StandardNormalMomentsAndAcceptance) {
  Rng rng(2024);
  const int d = 3;
  auto target = [](const Vector& v) { return -0.5 * v.squaredNorm(); };
  Vector x0 = Vector::Zero(d);
  auto s = RwmhState::start(x0, target(x0));
  const long m = 100000, burn = 20000;
  std::vector<std::vector<double>> x(d), x2(d);
  long acc = 0;
  for (long i = 0; i < m; ++i) {
    rwmh_step(s, target, rng);
    if (i < burn) continue;
    acc += s.last_accepted;
    for (int k = 0; k < d; ++k) {
      x[k].push_back(s.theta[k]);
      x2[k].push_back(s.theta[k] * s.theta[k]);
    }
  }
  for (int k = 0; k < d; ++k) {
    double m1 = 0, m2 = 0;
    for (double v : x[k]) m1 += v / x[k].size();
    for (double v : x2[k]) m2 += v / x2[k].size();
    EXPECT_LT(std::abs(m1), 3 * batch_se(x[k])) << "coordinate " << k;
    EXPECT_LT(std::abs(m2 - 1.0), 3 * batch_se(x2[k])) << "coordinate " << k;
  }
  EXPECT_NEAR(static_cast<double>(acc) / (m - burn), 0.234, 0.02);
}

TEST(Transdim, HastingsFactors) {
  EXPECT_DOUBLE_EQ(kappa_hastings_factor(3, 4), 0.5);
  EXPECT_DOUBLE_EQ(kappa_hastings_factor(4, 3), 2.0);
  EXPECT_DOUBLE_EQ(kappa_hastings_factor(5, 6), 1.0);
  EXPECT_DOUBLE_EQ(kappa_hastings_factor(6, 5), 1.0);
  EXPECT_DOUBLE_EQ(kappa_hastings_factor(3, 4, true), 0.5);
  EXPECT_DOUBLE_EQ(kappa_hastings_factor(4, 3, true), 1.0);
}

TEST(Transdim, ProposalNeighbours) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(propose_kappa(3, rng), 4);
  int down = 0;
  for (int i = 0; i < 10000; ++i) down += propose_kappa(7, rng) == 6;
  EXPECT_NEAR(down / 10000.0, 0.5, 0.02);
}

TEST(Transdim, FlatLikelihoodRecoversPrior) {
  Rng rng(77);
  TransdimConfig cfg;
  cfg.prior = DependencePrior::simulation();
  DependenceState s;
  s.eta = *sample_dependence_prior(5, cfg.prior, rng);
  s.beta = eta_to_beta(s.eta);
  s.loglik = 0.0;
  std::map<int, long> counts;
  const long m = 100000;
  for (long i = 0; i < m; ++i) {
    transdim_step(s, [](const BetaCoefficients&) { return 0.0; }, rng, cfg);
    ++counts[s.kappa()];
    ASSERT_TRUE(validate_eta(s.eta, 1e-9));
  }
  double tv = 0.0, seen = 0.0;
  for (int k = 3; k <= kMaxKappa; ++k) {
    const double p = std::exp(prior_logdensity_kappa(k, cfg.prior));
    const double q = counts.count(k) ? counts[k] / static_cast<double>(m) : 0.0;
    tv += std::abs(p - q);
    seen += p;
  }
  tv = 0.5 * (tv + (1.0 - seen));
  EXPECT_LT(tv, 0.05);
}

TEST(Priors, SupportAndJacobian) {
  const MarginalModel m{1.0, 0.0, 0.0, 2.0, 0.5};
  EXPECT_NEAR(marginal_logprior(m, MarginalPrior::A), -std::log(2.0), 1e-15);
  EXPECT_EQ(marginal_logprior({1.0, 0, 0, 2.0, 0.0}, MarginalPrior::A), -kInf);
  EXPECT_EQ(marginal_logprior({1.0, 0, 0, 2.0, -0.1}, MarginalPrior::B), -kInf);
  EXPECT_NEAR(margin_log_target(-3.0, m, MarginalPrior::A), -3.0, 1e-15);
  const double b = marginal_logprior(m, MarginalPrior::B);
  const double expect = -0.5 * 0.25 - std::log(2.0) - 0.5 * 9 * std::log(2.0) * std::log(2.0) -
                        0.5 * (0.5 / 1.5) * (0.5 / 1.5);
  EXPECT_NEAR(b, expect, 1e-14);
  EXPECT_EQ(parse_marginal_prior("C"), MarginalPrior::C);
  EXPECT_THROW(parse_marginal_prior("D"), std::invalid_argument);
}

TEST(Layout, PackRoundTrip) {
  const MarginalModel m{1.5, -0.2, 0.03, 4.0, 0.7};
  const MarginLayout r{true}, c{false};
  const auto back = r.unpack(r.pack(m));
  EXPECT_DOUBLE_EQ(back.beta1, -0.2);
  EXPECT_NEAR(back.sigma, 4.0, 1e-14);
  EXPECT_EQ(c.pack(m).size(), 3);
  EXPECT_EQ(c.unpack(c.pack(m)).beta1, 0.0);
}

TEST(Chain, SeedDeterminism) {
  const auto spec = TestbedSpec::of(Testbed::frechet);
  Rng data_rng(5);
  const auto s = make_censored_sample(sample_univariate(spec, 800, data_rng), 0.9);
  ChainConfig cfg;
  cfg.iterations = 3000;
  cfg.burn_in = 1000;
  Rng a(9), b(9), c(10);
  const auto x = run_univariate_chain(s, cfg, a);
  const auto y = run_univariate_chain(s, cfg, b);
  const auto z = run_univariate_chain(s, cfg, c);
  for (long i = 0; i < x.size(); ++i) ASSERT_EQ(x.draws[i].gamma, y.draws[i].gamma);
  EXPECT_NE(x.draws.back().gamma, z.draws.back().gamma);
}

TEST(Chain, ConfigValidation) {
  ChainConfig cfg;
  cfg.burn_in = cfg.iterations;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Chain, ShortBivariateRunKeepsValidCoefficients) {
  const auto spec = TestbedSpec::of(Testbed::cauchy2);
  Rng data_rng(6);
  auto [y1, y2] = sample_bivariate(spec, 600, data_rng);
  const auto s = make_bivariate_sample(y1, y2, 0.9);
  ChainConfig cfg;
  cfg.iterations = 1500;
  cfg.burn_in = 500;
  Rng rng(1);
  const auto ch = run_bivariate_chain(s, cfg, rng);
  ASSERT_EQ(ch.size(), 1500);
  for (const auto& d : ch.draws) {
    ASSERT_TRUE(validate_eta(d.eta, 1e-9));
    ASSERT_GT(d.theta1.gamma, 0.0);
    ASSERT_GT(d.theta2.sigma, 0.0);
    ASSERT_LE(d.eta.p0(), 0.1 + 1e-12);
    ASSERT_LE(d.eta.p1(), 0.1 + 1e-12);
  }
}

TEST(Rwmh, RejectionKeepsStateAndShrinksScale) {
  Vector x0(2);
  x0 << 0.3, -0.2;
  auto target = [&](const Vector& v) { return v == x0 ? 0.0 : -kInf; };
  auto s = RwmhState::start(x0, 0.0, 2.0);
  Rng rng(3);
  const double c = robbins_monro_steplength(0.234);
  rwmh_step(s, target, rng);
  EXPECT_EQ(s.theta, x0);
  EXPECT_FALSE(s.last_accepted);
  EXPECT_EQ(s.iteration, 1);
  EXPECT_NEAR(std::log(s.tau), std::log(2.0) - c * 0.234, 1e-14);
  // Identity phase: (1 + tau_old^2 / j) I.
  EXPECT_NEAR(s.sigma(0, 0), 1.0 + 4.0, 1e-14);
  EXPECT_EQ(s.sigma(0, 1), 0.0);
}

TEST(Chain, ScaleTraceSettlesOnFrechet) {
  const auto spec = TestbedSpec::of(Testbed::frechet);
  Rng data_rng(2026);
  const auto s = make_censored_sample(sample_univariate(spec, 1500, data_rng), 0.9);
  ChainConfig cfg;
  Rng rng(7);
  const auto ch = run_univariate_chain(s, cfg, rng);
  std::vector<double> log_tau(ch.tau.size());
  for (std::size_t i = 0; i < log_tau.size(); ++i) log_tau[i] = std::log(ch.tau[i]);
  const long m = ch.size();
  EXPECT_LT(std::abs(mean_of(log_tau, m - 10000, m) - mean_of(log_tau, m - 20000, m - 10000)), 0.05);
}

TEST(Rwmh, FlatLikelihoodRecoversPriorC) {
  const MarginLayout layout{false};
  auto target = [&](const Vector& v) {
    return margin_log_target(0.0, layout.unpack(v), MarginalPrior::C);
  };
  const MarginalModel m0{0.0, 0, 0, 1.0, 1.0};
  auto st = RwmhState::start(layout.pack(m0), target(layout.pack(m0)));
  Rng rng(13);
  const long burn = 20000, keep = 400000;
  std::vector<double> mu, ls, g;
  for (long i = 0; i < burn + keep; ++i) {
    rwmh_step(st, target, rng);
    if (i < burn) continue;
    mu.push_back(st.theta[0]);
    ls.push_back(st.theta[1]);
    g.push_back(st.theta[2]);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto sd = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
  };
  // mu ~ N(0, 25), log sigma ~ N(0, 25), gamma ~ N(0, 36) on (0, inf).
  EXPECT_NEAR(mean(mu), 0.0, 4 * batch_se(mu));
  EXPECT_NEAR(mean(ls), 0.0, 4 * batch_se(ls));
  EXPECT_NEAR(mean(g), 6.0 * std::sqrt(2.0 / std::numbers::pi), 4 * batch_se(g));
  EXPECT_NEAR(sd(mu), 5.0, 0.25);
  EXPECT_NEAR(sd(ls), 5.0, 0.25);
  EXPECT_NEAR(sd(g), 6.0 * std::sqrt(1.0 - 2.0 / std::numbers::pi), 0.2);
}

TEST(Chain, IndependenceMatchesSeparateUnivariateRuns) {
  // Endpoint masses pinned at 1/2 force eta = (1/2, ..., 1/2) at every
  // degree, so the margins decouple.
  const auto spec = TestbedSpec::of(Testbed::cauchy2);
  Rng data_rng(8);
  auto [y1, y2] = sample_bivariate(spec, 1500, data_rng);
  const auto s = make_bivariate_sample(y1, y2, 0.9);
  ChainConfig cfg;
  cfg.iterations = 30000;
  cfg.burn_in = 5000;
  cfg.dependence.prior = DependencePrior{3.2, 4.48, 0.5, 0.5, 0.5, 0.5};
  Rng r0(21), r1(22), r2(23);
  const auto biv = run_bivariate_chain(s, cfg, r0);
  for (const auto& d : biv.draws)
    for (double x : d.eta.eta) ASSERT_NEAR(x, 0.5, 1e-12);
  for (int which : {1, 2}) {
    const auto uni = run_univariate_chain(s.margin(which), cfg, which == 1 ? r1 : r2);
    std::vector<double> gb, gu;
    for (long i = cfg.burn_in; i < cfg.iterations; ++i) {
      gb.push_back((which == 1 ? biv.draws[i].theta1 : biv.draws[i].theta2).gamma);
      gu.push_back(uni.draws[i].gamma);
    }
    const double se = std::hypot(batch_se(gb), batch_se(gu));
    EXPECT_NEAR(mean_of(gb, 0, gb.size()), mean_of(gu, 0, gu.size()), 4 * se) << which;
  }
}
