#pragma once

// Marginal GEV/GP tail primitives: the censored-tail CDF power G^{k/n},
// its density, the standardizing transform onto the exceedance scale, the
// extrapolated quantile and threshold selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xqr/math.hpp"

namespace xqr {

struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double gamma = 1.0;

  // 1 + gamma (y - mu) / sigma; the tail expressions need this > 0.
  double bracket(double y) const { return 1.0 + gamma * (y - mu) / sigma; }
};

// GEV margin with location quadratic in a covariate z.
struct MarginalModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double sigma = 1.0;
  double gamma = 1.0;

  static MarginalModel constant(const GevParams& p) {
    return {p.mu, 0.0, 0.0, p.sigma, p.gamma};
  }
  bool has_regression() const { return beta1 != 0.0 || beta2 != 0.0; }
  GevParams at(double z) const;
};

inline double location_at(const MarginalModel& m, double z) {
  return m.beta0 + z * (m.beta1 + z * m.beta2);
}

inline GevParams MarginalModel::at(double z) const {
  return {location_at(*this, z), sigma, gamma};
}

inline void check_gev(const GevParams& theta) {
  if (!(theta.sigma > 0.0) || !std::isfinite(theta.sigma))
    throw std::invalid_argument("GEV scale must be positive, got " +
                                std::to_string(theta.sigma));
  if (!(theta.gamma > 0.0) || !std::isfinite(theta.gamma))
    throw std::invalid_argument("only positive tail indices are supported, got " +
                                std::to_string(theta.gamma));
}

struct ThresholdChoice {
  double threshold;
  int k;
};

// Empirical quantile at `level` (the order statistic X_{n-k,n}) together
// with the number k of observations strictly above it. With ties, k counts
// strict exceedances only.
inline ThresholdChoice select_threshold(std::span<const double> values, double level) {
  if (values.empty()) throw std::invalid_argument("select_threshold: empty input");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("select_threshold: level must lie in (0, 1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  const double t = sorted[rank - 1];
  const auto above = std::upper_bound(sorted.begin(), sorted.end(), t);
  const int k = static_cast<int>(sorted.end() - above);
  if (k < 1) throw std::invalid_argument("select_threshold: no observation exceeds the threshold");
  return {t, k};
}

struct CensoredSample {
  std::vector<double> values;
  std::vector<double> covariates;  // empty, or one per value
  double threshold = 0.0;
  int k = 0;

  int n() const { return static_cast<int>(values.size()); }
  double k_over_n() const { return static_cast<double>(k) / n(); }
  bool has_covariates() const { return !covariates.empty(); }
  double covariate(std::size_t i) const { return covariates.empty() ? 0.0 : covariates[i]; }
};

inline CensoredSample make_censored_sample(std::vector<double> values, double level,
                                           std::vector<double> covariates = {}) {
  if (!covariates.empty() && covariates.size() != values.size())
    throw std::invalid_argument("covariates must match the observations in length");
  auto choice = select_threshold(values, level);
  CensoredSample s;
  s.values = std::move(values);
  s.covariates = std::move(covariates);
  s.threshold = choice.threshold;
  s.k = choice.k;
  return s;
}

// exp(-(k/n) (1 + gamma (y - mu)/sigma)_+^{-1/gamma}); zero below the
// lower support edge.
inline double gev_cdf_power(double y, const GevParams& theta, double k_over_n) {
  const double b = theta.bracket(y);
  if (b <= 0.0) return 0.0;
  if (std::isinf(b)) return 1.0;
  return std::exp(-k_over_n * std::pow(b, -1.0 / theta.gamma));
}

// log G^{k/n}(t); -inf when t lies below the support.
inline double gev_log_cdf_power(double y, const GevParams& theta, double k_over_n) {
  const double b = theta.bracket(y);
  if (b <= 0.0) return -kInf;
  return -k_over_n * std::pow(b, -1.0 / theta.gamma);
}

// log of d/dy G^{k/n}(y); -inf outside the support.
inline double gev_tail_logdensity(double y, const GevParams& theta, double k_over_n) {
  const double b = theta.bracket(y);
  if (!(b > 0.0)) return -kInf;
  const double log_b = std::log(b);
  const double z = k_over_n * std::exp(-log_b / theta.gamma);
  return -z + (-1.0 / theta.gamma - 1.0) * log_b - std::log(theta.sigma) + std::log(k_over_n);
}

// z = (k/n) (1 + gamma (y - mu)/sigma)^{-1/gamma}; empty outside the support.
inline std::optional<double> marginal_transform(double y, const GevParams& theta,
                                                double k_over_n) {
  const double b = theta.bracket(y);
  if (!(b > 0.0)) return std::nullopt;
  return k_over_n * std::pow(b, -1.0 / theta.gamma);
}

// Q(p) ~ mu + sigma ((k/(n p))^gamma - 1) / gamma.
inline double extreme_quantile(double p, const GevParams& theta, int k, int n) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("extreme_quantile: p must lie in (0, 1)");
  if (theta.gamma == 0.0) throw std::invalid_argument("extreme_quantile: gamma must be nonzero");
  const double log_ratio = std::log(static_cast<double>(k) / (static_cast<double>(n) * p));
  return theta.mu + theta.sigma * std::expm1(theta.gamma * log_ratio) / theta.gamma;
}

}  // namespace xqr
