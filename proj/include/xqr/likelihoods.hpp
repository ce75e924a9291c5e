#pragma once

// Censored log-likelihoods for threshold exceedances.
//
// Univariate: observations at or below the threshold t contribute
// log G^{k/n}(t), exceedances contribute the log tail density.
//
// Bivariate: with z_i the marginal transforms, v = z2/(z1+z2) and
// L(z) = (z1+z2) A(v), each observation falls in one of four quadrants
// relative to (t1, t2):
//   (a) both censored      -L(z(t1), z(t2))
//   (b) only y1 > t1       log|dz1/dy1| - L + log L_1            at (z1(y1), z2(t2))
//   (c) only y2 > t2       log|dz2/dy2| - L + log L_2            at (z1(t1), z2(y2))
//   (d) both exceed        log|J| - L + log(L_1 L_2 - L_12)      at (z1(y1), z2(y2))
// with L_1 = A - vA', L_2 = A + (1-v)A', L_12 = -v(1-v)A''/(z1+z2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "xqr/dependence.hpp"
#include "xqr/margins.hpp"

namespace xqr {

struct BivariateSample {
  std::vector<double> y1, y2;
  std::vector<double> covariates;  // empty, or one per pair (shared by both margins)
  double t1 = 0.0, t2 = 0.0;
  int k1 = 0, k2 = 0;

  int n() const { return static_cast<int>(y1.size()); }
  bool has_covariates() const { return !covariates.empty(); }
  double covariate(std::size_t i) const { return covariates.empty() ? 0.0 : covariates[i]; }
  CensoredSample margin(int which) const;
};

inline BivariateSample make_bivariate_sample(std::vector<double> y1, std::vector<double> y2,
                                             double level, std::vector<double> covariates = {}) {
  if (y1.size() != y2.size()) throw std::invalid_argument("bivariate sample: margins differ in length");
  if (!covariates.empty() && covariates.size() != y1.size())
    throw std::invalid_argument("bivariate sample: covariates must match the observations");
  const auto c1 = select_threshold(y1, level);
  const auto c2 = select_threshold(y2, level);
  BivariateSample s;
  s.y1 = std::move(y1);
  s.y2 = std::move(y2);
  s.covariates = std::move(covariates);
  s.t1 = c1.threshold;
  s.t2 = c2.threshold;
  s.k1 = c1.k;
  s.k2 = c2.k;
  return s;
}

inline CensoredSample BivariateSample::margin(int which) const {
  CensoredSample s;
  s.values = which == 1 ? y1 : y2;
  s.covariates = covariates;
  s.threshold = which == 1 ? t1 : t2;
  s.k = which == 1 ? k1 : k2;
  return s;
}

struct DependenceParams {
  MarginalModel theta1, theta2;
  EtaCoefficients eta;
  BetaCoefficients beta;  // eta_to_beta(eta)

  static DependenceParams make(MarginalModel m1, MarginalModel m2, EtaCoefficients e) {
    auto b = eta_to_beta(e);
    return {m1, m2, std::move(e), std::move(b)};
  }
};

// ---------------------------------------------------------------------------

class UnivariateLikelihood {
 public:
  explicit UnivariateLikelihood(const CensoredSample& s) : sample_(&s) {
    for (int i = 0; i < s.n(); ++i) {
      if (s.values[i] > s.threshold) exceed_.push_back(i);
      else censored_.push_back(i);
    }
  }

  double operator()(const MarginalModel& m) const {
    const auto& s = *sample_;
    const double kn = s.k_over_n();
    if (s.has_covariates() && m.has_regression()) return eval_general(m);
    // Without regression every observation shares one parameter point.
    const GevParams theta = m.at(0.0);
    const double censored = gev_log_cdf_power(s.threshold, theta, kn);
    if (!censored_.empty() && censored == -kInf) return -kInf;
    double ll = static_cast<double>(censored_.size()) * censored;
    for (int i : exceed_) {
      const double c = gev_tail_logdensity(s.values[i], theta, kn);
      if (c == -kInf) return -kInf;
      ll += c;
    }
    return ll;
  }

  std::size_t exceedances() const { return exceed_.size(); }

 private:
  double eval_general(const MarginalModel& m) const {
    const auto& s = *sample_;
    const double kn = s.k_over_n();
    double ll = 0.0;
    for (int i = 0; i < s.n(); ++i) {
      const GevParams theta = m.at(s.covariate(i));
      const double c = s.values[i] > s.threshold ? gev_tail_logdensity(s.values[i], theta, kn)
                                                 : gev_log_cdf_power(s.threshold, theta, kn);
      if (c == -kInf) return -kInf;
      ll += c;
    }
    return ll;
  }

  const CensoredSample* sample_;
  std::vector<int> exceed_, censored_;
};

inline double univariate_censored_loglik(const CensoredSample& s, const MarginalModel& m) {
  if (s.n() == 0 || s.k < 1 || s.k >= s.n())
    throw std::invalid_argument("univariate_censored_loglik: need 1 <= k < n");
  return UnivariateLikelihood(s)(m);
}

inline double univariate_censored_loglik(const CensoredSample& s, const GevParams& theta) {
  return univariate_censored_loglik(s, MarginalModel::constant(theta));
}

// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kZFloor = 1e-300;

struct Transformed {
  double z;      // marginal transform, floored
  double log_dz; // log |dz/dy|; only meaningful for exceedances
  bool ok;
};

inline Transformed transform_point(double y, const GevParams& theta, double kn) {
  const double b = theta.bracket(y);
  if (!(b > 0.0)) return {0.0, 0.0, false};
  const double log_b = std::log(b);
  const double log_z = std::log(kn) - log_b / theta.gamma;
  const double z = std::max(std::exp(log_z), kZFloor);
  return {z, log_z - log_b - std::log(theta.sigma), true};
}

enum class Quadrant { both_censored, first_exceeds, second_exceeds, both_exceed };

// Log-likelihood contribution of one observation given the transformed
// coordinates. Returns -inf when a derivative factor is not positive.
inline double quadrant_contribution(Quadrant q, double z1, double z2, double log_dz1,
                                    double log_dz2, const BetaCoefficients& beta) {
  const double s = z1 + z2;
  const double v = std::clamp(z2 / s, 0.0, 1.0);
  const auto pk = pickands_all(v, beta);
  const double minus_l = -s * pk.a;
  switch (q) {
    case Quadrant::both_censored:
      return minus_l;
    case Quadrant::first_exceeds: {
      const double l1 = pk.a - v * pk.d1;
      if (!(l1 > 0.0)) return -kInf;
      return log_dz1 + minus_l + std::log(l1);
    }
    case Quadrant::second_exceeds: {
      const double l2 = pk.a + (1.0 - v) * pk.d1;
      if (!(l2 > 0.0)) return -kInf;
      return log_dz2 + minus_l + std::log(l2);
    }
    case Quadrant::both_exceed: {
      const double l1 = pk.a - v * pk.d1;
      const double l2 = pk.a + (1.0 - v) * pk.d1;
      const double l12 = -v * (1.0 - v) * pk.d2 / s;
      const double factor = l1 * l2 - l12;
      if (!(factor > 0.0)) return -kInf;
      return log_dz1 + log_dz2 + minus_l + std::log(factor);
    }
  }
  return -kInf;
}

}  // namespace detail

class BivariateLikelihood {
 public:
  using Quadrant = detail::Quadrant;

  explicit BivariateLikelihood(const BivariateSample& s) : sample_(&s) {
    if (s.n() == 0) throw std::invalid_argument("bivariate likelihood: empty sample");
    quadrant_.reserve(s.n());
    for (int i = 0; i < s.n(); ++i) {
      const bool e1 = s.y1[i] > s.t1, e2 = s.y2[i] > s.t2;
      const Quadrant q = e1 ? (e2 ? Quadrant::both_exceed : Quadrant::first_exceeds)
                            : (e2 ? Quadrant::second_exceeds : Quadrant::both_censored);
      quadrant_.push_back(q);
      if (q == Quadrant::both_censored) ++censored_count_;
      else active_.push_back(i);
    }
  }

  double operator()(const MarginalModel& m1, const MarginalModel& m2,
                    const BetaCoefficients& beta) const {
    const auto& s = *sample_;
    const double kn1 = static_cast<double>(s.k1) / s.n();
    const double kn2 = static_cast<double>(s.k2) / s.n();
    const bool shared = !s.has_covariates() || (!m1.has_regression() && !m2.has_regression());

    if (shared) {
      const GevParams g1 = m1.at(s.covariate(0)), g2 = m2.at(s.covariate(0));
      const auto c1 = detail::transform_point(s.t1, g1, kn1);
      const auto c2 = detail::transform_point(s.t2, g2, kn2);
      if (!c1.ok || !c2.ok) return -kInf;
      double ll = 0.0;
      if (censored_count_ > 0)
        ll += censored_count_ *
              detail::quadrant_contribution(Quadrant::both_censored, c1.z, c2.z, 0, 0, beta);
      for (int i : active_) {
        const double c = point(i, g1, g2, kn1, kn2, c1, c2, beta);
        if (c == -kInf) return -kInf;
        ll += c;
      }
      return ll;
    }

    double ll = 0.0;
    for (int i = 0; i < s.n(); ++i) {
      const double zc = s.covariate(i);
      const GevParams g1 = m1.at(zc), g2 = m2.at(zc);
      const auto c1 = detail::transform_point(s.t1, g1, kn1);
      const auto c2 = detail::transform_point(s.t2, g2, kn2);
      if (!c1.ok || !c2.ok) return -kInf;
      const double c = point(i, g1, g2, kn1, kn2, c1, c2, beta);
      if (c == -kInf) return -kInf;
      ll += c;
    }
    return ll;
  }

  double operator()(const DependenceParams& p) const { return (*this)(p.theta1, p.theta2, p.beta); }

  Quadrant quadrant(int i) const { return quadrant_[i]; }

 private:
  double point(int i, const GevParams& g1, const GevParams& g2, double kn1, double kn2,
               const detail::Transformed& c1, const detail::Transformed& c2,
               const BetaCoefficients& beta) const {
    const auto& s = *sample_;
    const Quadrant q = quadrant_[i];
    detail::Transformed a = c1, b = c2;
    if (q == Quadrant::first_exceeds || q == Quadrant::both_exceed) {
      a = detail::transform_point(s.y1[i], g1, kn1);
      if (!a.ok) return -kInf;
    }
    if (q == Quadrant::second_exceeds || q == Quadrant::both_exceed) {
      b = detail::transform_point(s.y2[i], g2, kn2);
      if (!b.ok) return -kInf;
    }
    return detail::quadrant_contribution(q, a.z, b.z, a.log_dz, b.log_dz, beta);
  }

  const BivariateSample* sample_;
  std::vector<Quadrant> quadrant_;
  std::vector<int> active_;
  long censored_count_ = 0;
};

inline double bivariate_censored_loglik(const BivariateSample& s, const DependenceParams& p) {
  return BivariateLikelihood(s)(p);
}

}  // namespace xqr
