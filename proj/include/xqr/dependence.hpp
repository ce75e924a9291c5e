#pragma once

// Bernstein-polynomial extremal dependence: the Pickands function A in
// Bernstein form (coefficients beta), the angular density h (coefficients
// eta), the bijection between the two, and the prior over (kappa, eta).
//
// Conventions: eta = (eta_0, ..., eta_{kappa-1}) is nondecreasing in [0, 1]
// with sum kappa/2; p0 = eta_0 and p1 = 1 - eta_{kappa-1} are the point
// masses of the angular measure at 0 and 1. beta = (beta_0, ..., beta_kappa)
// with beta_{j+1} = beta_j + (2 eta_j - 1)/kappa and beta_0 = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xqr/math.hpp"

namespace xqr {

inline constexpr int kMinKappa = 3;
// Upper limit on the polynomial degree; the sampler rejects larger proposals.
inline constexpr int kMaxKappa = 40;
// Scratch capacity for basis evaluations.
inline constexpr int kBasisCapacity = 64;

struct EtaCoefficients {
  int kappa = 0;
  std::vector<double> eta;

  double p0() const { return eta.front(); }
  double p1() const { return 1.0 - eta.back(); }
};

struct BetaCoefficients {
  int kappa = 0;
  std::vector<double> beta;
};

struct EtaValidation {
  bool ok = true;
  std::string violation;
  explicit operator bool() const { return ok; }
};

inline EtaValidation validate_eta(const EtaCoefficients& e, double sum_tol = 1e-10) {
  auto fail = [](std::string why) { return EtaValidation{false, std::move(why)}; };
  if (e.kappa < kMinKappa) return fail("degree below 3");
  if (static_cast<int>(e.eta.size()) != e.kappa)
    return fail("expected " + std::to_string(e.kappa) + " coefficients, got " +
                std::to_string(e.eta.size()));
  constexpr double eps = 1e-12;
  for (int j = 0; j < e.kappa; ++j) {
    const double x = e.eta[j];
    if (!(x >= -eps && x <= 1.0 + eps))
      return fail("range: eta_" + std::to_string(j) + " = " + std::to_string(x) +
                  " outside [0, 1]");
    if (j > 0 && x < e.eta[j - 1] - eps)
      return fail("monotonicity: eta_" + std::to_string(j) + " < eta_" + std::to_string(j - 1));
  }
  const double sum = std::accumulate(e.eta.begin(), e.eta.end(), 0.0);
  if (std::abs(sum - 0.5 * e.kappa) > sum_tol) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "sum: coefficients sum to " << sum << ", expected " << 0.5 * e.kappa;
    return fail(msg.str());
  }
  return {};
}

inline BetaCoefficients eta_to_beta(const EtaCoefficients& e) {
  if (auto v = validate_eta(e); !v) throw std::invalid_argument("eta_to_beta: " + v.violation);
  BetaCoefficients b{e.kappa, std::vector<double>(e.kappa + 1)};
  b.beta[0] = 1.0;
  for (int j = 0; j < e.kappa; ++j)
    b.beta[j + 1] = b.beta[j] + (2.0 * e.eta[j] - 1.0) / e.kappa;
  b.beta[e.kappa] = 1.0;  // exact by the sum constraint; pin against round-off
  return b;
}

inline EtaCoefficients beta_to_eta(const BetaCoefficients& b) {
  if (b.kappa < kMinKappa || static_cast<int>(b.beta.size()) != b.kappa + 1)
    throw std::invalid_argument("beta_to_eta: expected kappa + 1 coefficients with kappa >= 3");
  if (std::abs(b.beta.front() - 1.0) > 1e-10 || std::abs(b.beta.back() - 1.0) > 1e-10)
    throw std::invalid_argument("beta_to_eta: endpoint coefficients must equal 1");
  EtaCoefficients e{b.kappa, std::vector<double>(b.kappa)};
  for (int j = 0; j < b.kappa; ++j)
    e.eta[j] = 0.5 * (1.0 + b.kappa * (b.beta[j + 1] - b.beta[j]));
  if (auto v = validate_eta(e); !v) throw std::invalid_argument("beta_to_eta: " + v.violation);
  return e;
}

namespace detail {

inline void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(what) + ": argument must lie in [0, 1]");
}

inline void check_degree(int kappa, std::size_t n, std::size_t expected) {
  if (kappa < 1 || kappa + 1 > kBasisCapacity || n != expected)
    throw std::invalid_argument("Bernstein coefficients do not match the degree");
}

}  // namespace detail

struct PickandsValues {
  double a;   // A(v)
  double d1;  // A'(v)
  double d2;  // A''(v)
};

// A, A' and A'' in one pass. Coefficients are not validated.
inline PickandsValues pickands_all(double v, const BetaCoefficients& b) {
  const int k = b.kappa;
  std::array<double, kBasisCapacity> basis{};
  const auto& c = b.beta;
  PickandsValues out{0.0, 0.0, 0.0};

  bernstein_basis(k, v, basis);
  for (int j = 0; j <= k; ++j) out.a += c[j] * basis[j];

  bernstein_basis(k - 1, v, basis);
  for (int j = 0; j < k; ++j) out.d1 += (c[j + 1] - c[j]) * basis[j];
  out.d1 *= k;

  if (k >= 2) {
    bernstein_basis(k - 2, v, basis);
    for (int j = 0; j + 2 <= k; ++j) out.d2 += (c[j + 2] - 2.0 * c[j + 1] + c[j]) * basis[j];
    out.d2 *= static_cast<double>(k) * (k - 1);
  }
  return out;
}

inline double pickands_eval(double v, const BetaCoefficients& b) {
  detail::check_unit(v, "pickands_eval");
  detail::check_degree(b.kappa, b.beta.size(), b.kappa + 1);
  std::array<double, kBasisCapacity> basis{};
  bernstein_basis(b.kappa, v, basis);
  double a = 0.0;
  for (int j = 0; j <= b.kappa; ++j) a += b.beta[j] * basis[j];
  return a;
}

inline double pickands_d1(double v, const BetaCoefficients& b) {
  detail::check_unit(v, "pickands_d1");
  detail::check_degree(b.kappa, b.beta.size(), b.kappa + 1);
  return pickands_all(v, b).d1;
}

inline double pickands_d2(double v, const BetaCoefficients& b) {
  detail::check_unit(v, "pickands_d2");
  detail::check_degree(b.kappa, b.beta.size(), b.kappa + 1);
  return pickands_all(v, b).d2;
}

// h(w) = sum_{j=0}^{kappa-2} (eta_{j+1} - eta_j) Be(w; j+1, kappa-j-1).
// Coefficients are not validated.
inline double angular_density_unchecked(double w, const EtaCoefficients& e) {
  const int m = e.kappa - 2;
  std::array<double, kBasisCapacity> basis{};
  bernstein_basis(m, w, basis);
  double h = 0.0;
  for (int j = 0; j <= m; ++j) h += (e.eta[j + 1] - e.eta[j]) * basis[j];
  // Be(w; j+1, m-j+1) = (m+1) C(m, j) w^j (1-w)^(m-j)
  return (m + 1) * h;
}

inline double angular_density_eval(double w, const EtaCoefficients& e) {
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("angular_density_eval: w must lie in (0, 1)");
  if (auto v = validate_eta(e); !v) throw std::invalid_argument("angular_density_eval: " + v.violation);
  return angular_density_unchecked(w, e);
}

// ---------------------------------------------------------------------------
// Prior over (kappa, p0, p1, eta)

struct DependencePrior {
  double nb_mean = 3.2;      // mean of kappa - 3
  double nb_variance = 4.48; // variance of kappa - 3, must exceed the mean
  double p0_lo = 0.0;
  double p0_hi = 0.5;
  // Optional cap on p1 on top of the feasibility interval.
  double p1_lo = 0.0;
  double p1_hi = 1.0;

  static DependencePrior simulation() { return {3.2, 4.48, 0.0, 0.1, 0.0, 0.1}; }
  static DependencePrior data_analysis() { return {6.0, 8.0, 0.0, 0.5, 0.0, 1.0}; }
};

// NegBin(kappa - 3) in mean/variance form.
inline double prior_logdensity_kappa(int kappa, double nb_mean, double nb_variance) {
  if (kappa < kMinKappa) throw std::invalid_argument("prior_logdensity_kappa: kappa must be >= 3");
  if (!(nb_mean > 0.0 && nb_variance > nb_mean))
    throw std::invalid_argument("prior_logdensity_kappa: variance must exceed the mean > 0");
  const double size = nb_mean * nb_mean / (nb_variance - nb_mean);
  const double prob = nb_mean / nb_variance;
  const double x = kappa - kMinKappa;
  return std::lgamma(x + size) - std::lgamma(size) - std::lgamma(x + 1.0) +
         size * std::log(prob) + x * std::log1p(-prob);
}

inline double prior_logdensity_kappa(int kappa, const DependencePrior& prior) {
  return prior_logdensity_kappa(kappa, prior.nb_mean, prior.nb_variance);
}

struct P1Bounds {
  double lo, hi;
};

// Interval of p1 values for which the interior coefficients can be ordered
// inside [p0, 1 - p1] with the required sum.
inline P1Bounds p1_feasible_bounds(int kappa, double p0) {
  const double k = kappa;
  return {std::max(0.0, (k - 1.0) * p0 - 0.5 * k + 1.0), (p0 + 0.5 * k - 1.0) / (k - 1.0)};
}

struct EndpointMasses {
  double p0, p1;
};

template <class Rng>
EndpointMasses sample_p0_p1_prior(int kappa, Rng& rng, const DependencePrior& prior = {}) {
  if (kappa < kMinKappa) throw std::invalid_argument("sample_p0_p1_prior: kappa must be >= 3");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double p0 = prior.p0_lo + (prior.p0_hi - prior.p0_lo) * u01(rng);
  auto bounds = p1_feasible_bounds(kappa, p0);
  const double lo = std::max(bounds.lo, prior.p1_lo);
  const double hi = std::min(bounds.hi, prior.p1_hi);
  if (!(hi >= lo)) throw std::runtime_error("sample_p0_p1_prior: empty p1 interval");
  const double p1 = lo + (hi - lo) * u01(rng);
  return {p0, p1};
}

// Uniform draw of the interior coefficients eta_1..eta_{kappa-2} from
// {p0 <= eta_1 <= ... <= eta_{kappa-2} <= 1 - p1, sum = kappa/2 - p0 - (1 - p1)}.
// The first kappa-3 coordinates are sorted uniforms, the last is implied by
// the sum and the draw is accepted iff it keeps the order. Returns nullopt if
// `max_tries` draws are all rejected.
template <class Rng>
std::optional<EtaCoefficients> sample_eta_prior(int kappa, double p0, double p1, Rng& rng,
                                                long max_tries = 1L << 20) {
  if (kappa < kMinKappa) throw std::invalid_argument("sample_eta_prior: kappa must be >= 3");
  auto bounds = p1_feasible_bounds(kappa, p0);
  constexpr double slack = 1e-12;
  if (!(p0 >= 0.0 && p0 <= 0.5 && p1 >= bounds.lo - slack && p1 <= bounds.hi + slack))
    throw std::invalid_argument("sample_eta_prior: infeasible (p0, p1, kappa)");

  const double lo = p0;
  const double hi = 1.0 - p1;
  const int interior = kappa - 2;
  const double interior_sum = 0.5 * kappa - p0 - (1.0 - p1);

  EtaCoefficients e{kappa, std::vector<double>(kappa)};
  e.eta.front() = lo;
  e.eta.back() = hi;

  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> free(interior - 1);
  for (long attempt = 0; attempt < max_tries; ++attempt) {
    for (auto& x : free) x = unif(rng);
    std::sort(free.begin(), free.end());
    const double last = interior_sum - std::accumulate(free.begin(), free.end(), 0.0);
    const double floor = free.empty() ? lo : free.back();
    if (last < floor - slack || last > hi + slack) continue;
    std::copy(free.begin(), free.end(), e.eta.begin() + 1);
    e.eta[kappa - 2] = std::clamp(last, floor, hi);
    return e;
  }
  return std::nullopt;
}

// Full conditional prior draw of (p0, p1, eta) at a fixed degree.
template <class Rng>
std::optional<EtaCoefficients> sample_dependence_prior(int kappa, const DependencePrior& prior,
                                                       Rng& rng, long max_tries = 1L << 20) {
  auto masses = sample_p0_p1_prior(kappa, rng, prior);
  return sample_eta_prior(kappa, masses.p0, masses.p1, rng, max_tries);
}

}  // namespace xqr
