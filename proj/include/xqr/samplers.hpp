#pragma once

// Adaptive random-walk Metropolis for the marginal blocks and the
// trans-dimensional move on (kappa, eta), combined into univariate and
// bivariate chains.
//
// Marginal parameters are sampled on (beta0[, beta1, beta2], log sigma,
// gamma). Proposals are N(theta, tau * Sigma). After each iteration j:
//   Sigma = (1 + tau^2/j) I                        for j <= 100
//   Sigma = cov(theta_1..theta_j) + (tau^2/j) I     for j > 100
//   log tau += g_j c (alpha_j - pi*)
// with c = sqrt(2 pi) exp(zeta0^2 / 2) / (2 zeta0), zeta0 = -Phi^{-1}(pi*/2)
// and g_j a decreasing gain (see AdaptationGain).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include "xqr/dependence.hpp"
#include "xqr/likelihoods.hpp"
#include "xqr/margins.hpp"
#include "xqr/math.hpp"

namespace xqr {

using Rng = std::mt19937_64;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A: flat on (mu, log sigma, gamma), i.e. proportional to 1/sigma.
// B: N(mu; 0, 2^2) logN(sigma; 0, (1/3)^2) N(gamma; 0, (3/2)^2).
// C: N(mu; 0, 5^2) logN(sigma; 0, 5^2) N(gamma; 0, 6^2).
// Location priors apply to every regression coefficient. All priors are
// restricted to gamma > 0.
enum class MarginalPrior { A, B, C };

inline MarginalPrior parse_marginal_prior(const std::string& s) {
  if (s == "A" || s == "a") return MarginalPrior::A;
  if (s == "B" || s == "b") return MarginalPrior::B;
  if (s == "C" || s == "c") return MarginalPrior::C;
  throw std::invalid_argument("unknown marginal prior '" + s + "' (expected A, B or C)");
}

inline const char* to_string(MarginalPrior p) {
  switch (p) {
    case MarginalPrior::A: return "A";
    case MarginalPrior::B: return "B";
    case MarginalPrior::C: return "C";
  }
  return "?";
}

// Log prior density in natural coordinates (up to a constant).
inline double marginal_logprior(const MarginalModel& m, MarginalPrior prior) {
  if (!(m.sigma > 0.0) || !(m.gamma > 0.0)) return -kInf;
  const double log_sigma = std::log(m.sigma);
  auto normal = [](double x, double sd) { return -0.5 * (x / sd) * (x / sd); };
  switch (prior) {
    case MarginalPrior::A:
      return -log_sigma;
    case MarginalPrior::B:
      return normal(m.beta0, 2.0) + normal(m.beta1, 2.0) + normal(m.beta2, 2.0) - log_sigma +
             normal(log_sigma, 1.0 / 3.0) + normal(m.gamma, 1.5);
    case MarginalPrior::C:
      return normal(m.beta0, 5.0) + normal(m.beta1, 5.0) + normal(m.beta2, 5.0) - log_sigma +
             normal(log_sigma, 5.0) + normal(m.gamma, 6.0);
  }
  return -kInf;
}

// Packing of a marginal model into the sampled coordinates.
struct MarginLayout {
  bool regression = false;

  int dim() const { return regression ? 5 : 3; }

  Vector pack(const MarginalModel& m) const {
    Vector v(dim());
    int i = 0;
    v[i++] = m.beta0;
    if (regression) {
      v[i++] = m.beta1;
      v[i++] = m.beta2;
    }
    v[i++] = std::log(m.sigma);
    v[i++] = m.gamma;
    return v;
  }

  MarginalModel unpack(const Vector& v) const {
    MarginalModel m;
    int i = 0;
    m.beta0 = v[i++];
    if (regression) {
      m.beta1 = v[i++];
      m.beta2 = v[i++];
    }
    m.sigma = std::exp(v[i++]);
    m.gamma = v[i++];
    return m;
  }
};

// Log target on the sampled coordinates: likelihood + prior + log sigma
// (Jacobian of the log-scale move).
inline double margin_log_target(double loglik, const MarginalModel& m, MarginalPrior prior) {
  const double lp = marginal_logprior(m, prior);
  if (lp == -kInf || !std::isfinite(loglik)) return -kInf;
  return loglik + lp + std::log(m.sigma);
}

// Gain g_j of the scale recursion. polynomial: max(1, j/d)^{-exponent};
// harmonic: 1/j; constant: 1 (no decay).
enum class AdaptationGain { polynomial, harmonic, constant };

inline AdaptationGain parse_adaptation_gain(const std::string& s) {
  if (s == "polynomial") return AdaptationGain::polynomial;
  if (s == "harmonic") return AdaptationGain::harmonic;
  if (s == "constant") return AdaptationGain::constant;
  throw std::invalid_argument("unknown gain schedule '" + s +
                              "' (expected polynomial, harmonic or constant)");
}

inline const char* to_string(AdaptationGain g) {
  switch (g) {
    case AdaptationGain::polynomial: return "polynomial";
    case AdaptationGain::harmonic: return "harmonic";
    case AdaptationGain::constant: return "constant";
  }
  return "?";
}

struct AdaptationConfig {
  double target_accept = 0.234;
  double tau0 = 1.0;
  int identity_phase = 100;
  AdaptationGain gain = AdaptationGain::polynomial;
  double gain_exponent = 0.6;
};

inline double robbins_monro_steplength(double target_accept) {
  const double zeta0 = -normal_quantile(0.5 * target_accept);
  return std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * zeta0 * zeta0) / (2.0 * zeta0);
}

inline double adaptation_gain(const AdaptationConfig& cfg, long j, long d) {
  switch (cfg.gain) {
    case AdaptationGain::polynomial:
      return std::pow(std::max(1.0, static_cast<double>(j) / static_cast<double>(d)),
                      -cfg.gain_exponent);
    case AdaptationGain::harmonic:
      return 1.0 / static_cast<double>(j);
    case AdaptationGain::constant:
      return 1.0;
  }
  return 1.0;
}

struct RwmhState {
  Vector theta;
  double log_target = -kInf;
  Matrix sigma;        // proposal covariance (before tau scaling)
  double tau = 1.0;
  Vector running_mean;
  Matrix comoment;     // sum of (theta_k - mean)(theta_k - mean)^T
  long iteration = 0;  // completed iterations
  long accept_count = 0;
  double last_accept_prob = 0.0;
  bool last_accepted = false;

  static RwmhState start(const Vector& theta0, double log_target0, double tau0 = 1.0) {
    if (!std::isfinite(log_target0))
      throw std::invalid_argument("rwmh: initial state has non-finite log target");
    const auto d = theta0.size();
    RwmhState s;
    s.theta = theta0;
    s.log_target = log_target0;
    s.sigma = Matrix::Identity(d, d);
    s.tau = tau0;
    s.running_mean = Vector::Zero(d);
    s.comoment = Matrix::Zero(d, d);
    return s;
  }
};

// One Metropolis step followed by the covariance and scale updates.
// `log_target` maps a coordinate vector to its log posterior (may be -inf).
template <class LogTarget>
void rwmh_step(RwmhState& s, const LogTarget& log_target, Rng& rng,
               const AdaptationConfig& cfg = {}) {
  if (!std::isfinite(s.log_target))
    throw std::logic_error("rwmh_step: current state has non-finite log target");
  const auto d = s.theta.size();

  Eigen::LLT<Matrix> chol(s.tau * s.sigma);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("rwmh_step: proposal covariance is not positive definite");
  std::normal_distribution<double> normal;
  Vector eps(d);
  for (Eigen::Index i = 0; i < d; ++i) eps[i] = normal(rng);
  const Vector proposal = s.theta + chol.matrixL() * eps;

  const double lt = log_target(proposal);
  double alpha = 0.0;
  if (std::isfinite(lt)) alpha = lt >= s.log_target ? 1.0 : std::exp(lt - s.log_target);
  std::uniform_real_distribution<double> unif;
  s.last_accepted = alpha > unif(rng);
  if (s.last_accepted) {
    s.theta = proposal;
    s.log_target = lt;
    ++s.accept_count;
  }
  s.last_accept_prob = alpha;

  // Welford update of the history mean and co-moment.
  const long j = ++s.iteration;
  const Vector delta = s.theta - s.running_mean;
  s.running_mean += delta / static_cast<double>(j);
  s.comoment += delta * (s.theta - s.running_mean).transpose();

  const double tau2_j = s.tau * s.tau / static_cast<double>(j);
  if (j <= cfg.identity_phase) {
    s.sigma = (1.0 + tau2_j) * Matrix::Identity(d, d);
  } else {
    s.sigma = s.comoment / static_cast<double>(j - 1);
    s.sigma.diagonal().array() += tau2_j;
  }

  const double c = robbins_monro_steplength(cfg.target_accept);
  s.tau = std::exp(std::log(s.tau) + adaptation_gain(cfg, j, d) * c * (alpha - cfg.target_accept));
}

// ---------------------------------------------------------------------------
// Trans-dimensional move on (kappa, eta)

struct DependenceState {
  EtaCoefficients eta;
  BetaCoefficients beta;
  double loglik = -kInf;

  int kappa() const { return eta.kappa; }
};

struct TransdimConfig {
  DependencePrior prior;
  // One-sided factor: 1/2 when leaving kappa = 3, 1 otherwise
  // (omits the factor 2 for moves into kappa = 3).
  bool paper_exact_c = false;
  long max_prior_tries = 1L << 20;
};

struct TransdimOutcome {
  int proposed_kappa = 0;
  bool accepted = false;
  bool draw_failed = false;
};

inline int propose_kappa(int kappa, Rng& rng) {
  if (kappa == kMinKappa) return kMinKappa + 1;
  std::uniform_real_distribution<double> unif;
  return unif(rng) < 0.5 ? kappa - 1 : kappa + 1;
}

// Hastings factor q(kappa | kappa') / q(kappa' | kappa) for the degree move.
inline double kappa_hastings_factor(int from, int to, bool paper_exact = false) {
  if (paper_exact) return from == kMinKappa ? 0.5 : 1.0;
  const double forward = from == kMinKappa ? 1.0 : 0.5;
  const double backward = to == kMinKappa ? 1.0 : 0.5;
  return backward / forward;
}

// `loglik` maps BetaCoefficients to the log-likelihood at the current
// marginal parameters.
template <class LogLik>
TransdimOutcome transdim_step(DependenceState& s, const LogLik& loglik, Rng& rng,
                              const TransdimConfig& cfg = {}) {
  TransdimOutcome out;
  const int kappa = s.kappa();
  const int next = propose_kappa(kappa, rng);
  out.proposed_kappa = next;
  std::uniform_real_distribution<double> unif;
  if (next > kMaxKappa) {
    unif(rng);  // keep the stream aligned with an ordinary rejection
    return out;
  }
  auto eta = sample_dependence_prior(next, cfg.prior, rng, cfg.max_prior_tries);
  if (!eta) {
    out.draw_failed = true;
    unif(rng);
    return out;
  }
  auto beta = eta_to_beta(*eta);
  const double ll = loglik(beta);
  double log_ratio = -kInf;
  if (std::isfinite(ll)) {
    log_ratio = std::log(kappa_hastings_factor(kappa, next, cfg.paper_exact_c)) +
                prior_logdensity_kappa(next, cfg.prior) -
                prior_logdensity_kappa(kappa, cfg.prior) + ll - s.loglik;
  }
  const double alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  if (alpha > unif(rng)) {
    s.eta = std::move(*eta);
    s.beta = std::move(beta);
    s.loglik = ll;
    out.accepted = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chains

struct ChainConfig {
  long iterations = 50000;
  long burn_in = 30000;
  std::uint64_t seed = 1;
  MarginalPrior prior = MarginalPrior::A;
  bool regression = false;
  AdaptationConfig adaptation;
  TransdimConfig dependence{DependencePrior::simulation(), false};
  double gamma0 = 0.5;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("chain: iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations)
      throw std::invalid_argument("chain: burn-in must satisfy 0 <= m < M");
    if (!(adaptation.target_accept > 0.0 && adaptation.target_accept < 1.0))
      throw std::invalid_argument("chain: target acceptance must lie in (0, 1)");
  }
};

struct UnivariateChain {
  std::vector<MarginalModel> draws;
  std::vector<double> tau;
  std::vector<double> accept_prob;
  std::vector<std::uint8_t> accepted;
  long burn_in = 0;
  int k = 0, n = 0;

  long size() const { return static_cast<long>(draws.size()); }
  // Mean acceptance probability over iterations [from, to).
  double acceptance_rate(long from, long to) const;
};

struct BivariateDraw {
  MarginalModel theta1, theta2;
  EtaCoefficients eta;
};

struct BivariateChain {
  std::vector<BivariateDraw> draws;
  std::vector<double> tau1, tau2;
  std::vector<double> accept_prob1, accept_prob2;
  std::vector<std::uint8_t> accepted1, accepted2, accepted_dep;
  long burn_in = 0;
  int k1 = 0, k2 = 0, n = 0;

  long size() const { return static_cast<long>(draws.size()); }
};

inline double mean_of(const std::vector<double>& v, long from, long to) {
  from = std::max(0L, from);
  to = std::min(static_cast<long>(v.size()), to);
  if (to <= from) return kNaN;
  double s = 0.0;
  for (long i = from; i < to; ++i) s += v[i];
  return s / static_cast<double>(to - from);
}

inline double UnivariateChain::acceptance_rate(long from, long to) const {
  return mean_of(accept_prob, from, to);
}

// Location at the threshold, tail index gamma0 and the scale whose GP tail
// has the observed median excess, sigma = gamma0 m / (2^gamma0 - 1). The
// sample SD of the exceedances is useless as a scale under heavy tails.
// With regression the location starts from a least-squares quadratic fit
// of y on z, shifted down if needed so that every observation lies inside
// the support.
inline MarginalModel initial_margin(const CensoredSample& s, double gamma0,
                                    bool regression = false) {
  std::vector<double> above;
  for (double y : s.values)
    if (y > s.threshold) above.push_back(y - s.threshold);
  double sigma0 = 0.0;
  if (!above.empty()) {
    const auto mid = above.begin() + above.size() / 2;
    std::nth_element(above.begin(), mid, above.end());
    sigma0 = gamma0 * *mid / std::expm1(gamma0 * std::numbers::ln2);
  }
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) sigma0 = std::max(std::abs(s.threshold), 1.0);
  MarginalModel m0{s.threshold, 0.0, 0.0, sigma0, gamma0};
  if (!regression || !s.has_covariates()) return m0;

  const auto n = static_cast<Eigen::Index>(s.n());
  Matrix x(n, 3);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = s.covariates[i];
    x(i, 0) = 1.0;
    x(i, 1) = z;
    x(i, 2) = z * z;
    y[i] = s.values[i];
  }
  const Vector b = x.colPivHouseholderQr().solve(y);
  if (!b.allFinite()) return m0;
  m0.beta0 = b[0];
  m0.beta1 = b[1];
  m0.beta2 = b[2];
  const double resid_sd = std::sqrt((y - x * b).squaredNorm() / std::max<Eigen::Index>(n - 3, 1));
  if (resid_sd > 0.0 && std::isfinite(resid_sd)) m0.sigma = resid_sd;
  // Support requires mu(z_i) < t + sigma / gamma for every observation.
  double excess = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    excess = std::max(excess, location_at(m0, s.covariates[i]) - s.threshold);
  if (excess > 0.0) m0.beta0 -= excess;
  return m0;
}

inline UnivariateChain run_univariate_chain(const CensoredSample& sample, const ChainConfig& cfg,
                                            Rng& rng) {
  cfg.validate();
  if (cfg.regression && !sample.has_covariates())
    throw std::invalid_argument("univariate chain: regression requested without covariates");
  const MarginLayout layout{cfg.regression};
  const UnivariateLikelihood lik(sample);
  auto target = [&](const Vector& v) {
    const auto m = layout.unpack(v);
    if (marginal_logprior(m, cfg.prior) == -kInf) return -kInf;
    return margin_log_target(lik(m), m, cfg.prior);
  };

  const auto m0 = initial_margin(sample, cfg.gamma0, cfg.regression);
  auto state = RwmhState::start(layout.pack(m0), target(layout.pack(m0)), cfg.adaptation.tau0);

  UnivariateChain chain;
  chain.burn_in = cfg.burn_in;
  chain.k = sample.k;
  chain.n = sample.n();
  chain.draws.reserve(cfg.iterations);
  chain.tau.reserve(cfg.iterations);
  chain.accept_prob.reserve(cfg.iterations);
  chain.accepted.reserve(cfg.iterations);
  for (long it = 0; it < cfg.iterations; ++it) {
    rwmh_step(state, target, rng, cfg.adaptation);
    chain.draws.push_back(layout.unpack(state.theta));
    chain.tau.push_back(state.tau);
    chain.accept_prob.push_back(state.last_accept_prob);
    chain.accepted.push_back(state.last_accepted);
  }
  return chain;
}

inline BivariateChain run_bivariate_chain(const BivariateSample& sample, const ChainConfig& cfg,
                                          Rng& rng) {
  cfg.validate();
  if (cfg.regression && !sample.has_covariates())
    throw std::invalid_argument("bivariate chain: regression requested without covariates");
  const MarginLayout layout{cfg.regression};
  const BivariateLikelihood lik(sample);

  MarginalModel m1 = initial_margin(sample.margin(1), cfg.gamma0, cfg.regression);
  MarginalModel m2 = initial_margin(sample.margin(2), cfg.gamma0, cfg.regression);

  const int kappa0 =
      std::clamp(kMinKappa + static_cast<int>(std::lround(cfg.dependence.prior.nb_mean)),
                 kMinKappa, kMaxKappa);
  DependenceState dep;
  for (int attempt = 0;; ++attempt) {
    auto eta = sample_dependence_prior(kappa0, cfg.dependence.prior, rng,
                                       cfg.dependence.max_prior_tries);
    if (eta) {
      dep.beta = eta_to_beta(*eta);
      dep.eta = std::move(*eta);
      dep.loglik = lik(m1, m2, dep.beta);
      if (std::isfinite(dep.loglik)) break;
    }
    if (attempt > 1000)
      throw std::runtime_error("bivariate chain: could not find a finite initial likelihood");
  }

  auto target1 = [&](const Vector& v) {
    const auto m = layout.unpack(v);
    if (marginal_logprior(m, cfg.prior) == -kInf) return -kInf;
    return margin_log_target(lik(m, m2, dep.beta), m, cfg.prior);
  };
  auto target2 = [&](const Vector& v) {
    const auto m = layout.unpack(v);
    if (marginal_logprior(m, cfg.prior) == -kInf) return -kInf;
    return margin_log_target(lik(m1, m, dep.beta), m, cfg.prior);
  };
  auto s1 = RwmhState::start(layout.pack(m1), target1(layout.pack(m1)), cfg.adaptation.tau0);
  auto s2 = RwmhState::start(layout.pack(m2), target2(layout.pack(m2)), cfg.adaptation.tau0);

  BivariateChain chain;
  chain.burn_in = cfg.burn_in;
  chain.k1 = sample.k1;
  chain.k2 = sample.k2;
  chain.n = sample.n();
  chain.draws.reserve(cfg.iterations);
  for (long it = 0; it < cfg.iterations; ++it) {
    // The cached log targets depend on the other blocks; refresh them
    // before each block update.
    s1.log_target = target1(s1.theta);
    rwmh_step(s1, target1, rng, cfg.adaptation);
    m1 = layout.unpack(s1.theta);

    s2.log_target = target2(s2.theta);
    rwmh_step(s2, target2, rng, cfg.adaptation);
    m2 = layout.unpack(s2.theta);

    dep.loglik = lik(m1, m2, dep.beta);
    auto dep_out = transdim_step(
        dep, [&](const BetaCoefficients& b) { return lik(m1, m2, b); }, rng, cfg.dependence);

    chain.draws.push_back({m1, m2, dep.eta});
    chain.tau1.push_back(s1.tau);
    chain.tau2.push_back(s2.tau);
    chain.accept_prob1.push_back(s1.last_accept_prob);
    chain.accept_prob2.push_back(s2.last_accept_prob);
    chain.accepted1.push_back(s1.last_accepted);
    chain.accepted2.push_back(s2.last_accepted);
    chain.accepted_dep.push_back(dep_out.accepted);
  }
  return chain;
}

}  // namespace xqr
