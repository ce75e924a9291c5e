#pragma once

// Quantile-region geometry. For tail indices (g1, g2) and angular density h:
//   q(w)  = 2 w^{1-g1} (1-w)^{1-g2} h(w) / (g1 g2)
//   q*(w) = q(w)^{-1/(1+g1+g2)}
// The basic set S has boundary points (w, 1-w) / q*(w). A boundary point x
// maps to the data scale through
//   y_i = mu_i + sigma_i ((k_i nu(S) x_i / (n p))^{g_i} - 1) / g_i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xqr/dependence.hpp"
#include "xqr/margins.hpp"
#include "xqr/math.hpp"
#include "xqr/quadrature.hpp"
#include "xqr/samplers.hpp"

namespace xqr {

// radius_weighted: nu(S) = 2 int h(w) / q*(w) dw
// exponent_measure: nu(S) = 2 int h(w) q*(w) dw
enum class NuConvention { radius_weighted, exponent_measure };

inline NuConvention parse_nu_convention(const std::string& s) {
  if (s == "radius-weighted") return NuConvention::radius_weighted;
  if (s == "exponent-measure") return NuConvention::exponent_measure;
  throw std::invalid_argument("unknown nu convention '" + s +
                              "' (expected radius-weighted or exponent-measure)");
}

inline const char* to_string(NuConvention c) {
  return c == NuConvention::radius_weighted ? "radius-weighted" : "exponent-measure";
}

// q(w, 1-w) from a value of h.
inline double basic_density_q(double w, double h, double gamma1, double gamma2) {
  return 2.0 * std::pow(w, 1.0 - gamma1) * std::pow(1.0 - w, 1.0 - gamma2) * h /
         (gamma1 * gamma2);
}

// q*(w) from a value of h; +inf when h(w) = 0.
inline double angular_basic_density(double w, double h, double gamma1, double gamma2) {
  if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("angular_basic_density: w must lie in (0, 1)");
  if (!(gamma1 > 0.0 && gamma2 > 0.0))
    throw std::invalid_argument("angular_basic_density: tail indices must be positive");
  if (h < 0.0) throw std::invalid_argument("angular_basic_density: negative angular density");
  const double q = basic_density_q(w, h, gamma1, gamma2);
  if (q == 0.0) return kInf;
  return std::pow(q, -1.0 / (1.0 + gamma1 + gamma2));
}

inline double angular_basic_density(double w, const EtaCoefficients& eta, double gamma1,
                                    double gamma2) {
  return angular_basic_density(w, std::max(angular_density_eval(w, eta), 0.0), gamma1, gamma2);
}

// Boundary radius 1/q*(w); 0 where h vanishes.
inline double basic_radius(double w, double h, double gamma1, double gamma2) {
  const double qs = angular_basic_density(w, h, gamma1, gamma2);
  return std::isinf(qs) ? 0.0 : 1.0 / qs;
}

// nu(S) for any angular density callable h(w) on (0, 1).
template <class H>
double nu_S(const H& h, double gamma1, double gamma2,
            NuConvention convention = NuConvention::radius_weighted,
            const QuadratureOptions& opt = {}) {
  auto integrand = [&](double w) {
    if (!(w > 0.0 && w < 1.0)) return 0.0;
    const double hw = h(w);
    if (!(hw > 0.0)) return 0.0;
    const double qs = angular_basic_density(w, hw, gamma1, gamma2);
    return convention == NuConvention::radius_weighted ? 2.0 * hw / qs : 2.0 * hw * qs;
  };
  return integrate_or_throw(integrand, 0.0, 1.0, opt, "nu(S)");
}

inline double nu_S(const EtaCoefficients& eta, double gamma1, double gamma2,
                   NuConvention convention = NuConvention::radius_weighted,
                   const QuadratureOptions& opt = {}) {
  if (auto v = validate_eta(eta); !v) throw std::invalid_argument("nu_S: " + v.violation);
  return nu_S([&](double w) { return angular_density_unchecked(w, eta); }, gamma1, gamma2,
              convention, opt);
}

// 199 equally spaced points on [0.005, 0.995].
inline std::vector<double> default_w_grid(int size = 199, double lo = 0.005, double hi = 0.995) {
  if (size < 2) throw std::invalid_argument("w grid needs at least two points");
  if (!(lo > 0.0 && hi < 1.0 && lo < hi)) throw std::invalid_argument("w grid must lie inside (0, 1)");
  std::vector<double> w(size);
  for (int i = 0; i < size; ++i) w[i] = lo + (hi - lo) * i / (size - 1.0);
  return w;
}

struct Point2 {
  double x = 0.0, y = 0.0;
};

// Boundary of S on the grid for an angular density callable.
template <class H>
std::vector<Point2> basic_set_boundary(std::span<const double> w_grid, const H& h, double gamma1,
                                       double gamma2) {
  std::vector<Point2> pts;
  pts.reserve(w_grid.size());
  for (double w : w_grid) {
    const double r = basic_radius(w, std::max(h(w), 0.0), gamma1, gamma2);
    pts.push_back({w * r, (1.0 - w) * r});
  }
  return pts;
}

inline std::vector<Point2> basic_set_boundary(std::span<const double> w_grid,
                                              const EtaCoefficients& eta, double gamma1,
                                              double gamma2) {
  if (auto v = validate_eta(eta); !v) throw std::invalid_argument("basic_set_boundary: " + v.violation);
  return basic_set_boundary(w_grid, [&](double w) { return angular_density_unchecked(w, eta); },
                            gamma1, gamma2);
}

struct QuantileTarget {
  double p = 0.0;
  int k1 = 0, k2 = 0, n = 0;

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile target: p must lie in (0, 1)");
    if (n <= 0 || k1 <= 0 || k2 <= 0) throw std::invalid_argument("quantile target: k and n must be positive");
  }
};

// Data-scale coordinate for one S-scale coordinate.
inline double region_coordinate(double x, double p, double nu, const GevParams& theta, int k,
                                int n) {
  if (x == 0.0) return theta.mu - theta.sigma / theta.gamma;
  const double log_ratio = std::log(static_cast<double>(k) * nu * x / (static_cast<double>(n) * p));
  return theta.mu + theta.sigma * std::expm1(theta.gamma * log_ratio) / theta.gamma;
}

inline std::vector<Point2> quantile_region(const QuantileTarget& target, const GevParams& theta1,
                                           const GevParams& theta2, double nu,
                                           std::span<const Point2> boundary) {
  target.validate();
  if (!(nu > 0.0)) throw std::invalid_argument("quantile_region: nu(S) must be positive");
  std::vector<Point2> out;
  out.reserve(boundary.size());
  for (const auto& b : boundary)
    out.push_back({region_coordinate(b.x, target.p, nu, theta1, target.k1, target.n),
                   region_coordinate(b.y, target.p, nu, theta2, target.k2, target.n)});
  return out;
}

// ---------------------------------------------------------------------------
// Posterior summaries

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = prob * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Interval {
  double mean = kNaN, sd = kNaN, lo = kNaN, hi = kNaN;
  double level = kNaN;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Mean, standard deviation and central interval at `level`.
inline Interval summarize_values(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("summary of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credibility level must lie in (0, 1)");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - level);
  Interval out;
  out.mean = mean;
  out.sd = values.size() > 1 ? std::sqrt(ss / (values.size() - 1.0)) : 0.0;
  out.lo = quantile_sorted(values, tail);
  out.hi = quantile_sorted(values, 1.0 - tail);
  out.level = level;
  return out;
}

struct Band {
  std::vector<double> w, mean, lo, hi;

  std::size_t size() const { return w.size(); }
  // Fraction of grid points where `truth` lies inside [lo, hi].
  double coverage(std::span<const double> truth) const;
};

inline double Band::coverage(std::span<const double> truth) const {
  if (truth.size() != w.size()) throw std::invalid_argument("band coverage: size mismatch");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (truth[i] >= lo[i] && truth[i] <= hi[i]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(w.size());
}

struct RegionCurve {
  std::vector<double> w;
  std::vector<Point2> mean, lo, hi;
  double p = kNaN;  // NaN for the basic set
  double level = kNaN;

  std::size_t size() const { return w.size(); }
  // Fraction of grid points where both coordinates of `truth` are inside
  // their bands.
  double coverage(std::span<const Point2> truth) const;
};

inline double RegionCurve::coverage(std::span<const Point2> truth) const {
  if (truth.size() != w.size()) throw std::invalid_argument("region coverage: size mismatch");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool in_x = truth[i].x >= lo[i].x && truth[i].x <= hi[i].x;
    const bool in_y = truth[i].y >= lo[i].y && truth[i].y <= hi[i].y;
    if (in_x && in_y) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(w.size());
}

namespace detail {

// Per-grid-point mean and central band over draws stored draw-major.
inline void band_from_draws(const std::vector<std::vector<double>>& by_point, double level,
                            std::vector<double>& mean, std::vector<double>& lo,
                            std::vector<double>& hi) {
  const std::size_t m = by_point.size();
  mean.resize(m);
  lo.resize(m);
  hi.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto s = summarize_values(by_point[i], level);
    mean[i] = s.mean;
    lo[i] = s.lo;
    hi[i] = s.hi;
  }
}

}  // namespace detail

struct RegionSummaryConfig {
  std::vector<double> probabilities{1.0 / 750, 1.0 / 1500, 1.0 / 3000};
  double level = 0.90;
  long thin = 5;
  std::vector<double> w_grid = default_w_grid();
  NuConvention convention = NuConvention::radius_weighted;
  QuadratureOptions quadrature{};
  std::optional<double> covariate;  // evaluate locations at this covariate value
  std::size_t min_draws = 100;
};

struct RegionSummary {
  Band inverse_q_star;            // radius 1/q*(w)
  RegionCurve basic_set;          // S scale
  std::vector<RegionCurve> regions;  // one per probability, data scale
  Interval nu;
  Interval p0, p1, kappa;
  std::size_t draws_used = 0;
};

// Every `thin`-th post-burn-in draw contributes h -> q* -> nu(S) ->
// boundary -> region; bands are pointwise per coordinate.
inline RegionSummary summarize_posterior_regions(const BivariateChain& chain,
                                                 const RegionSummaryConfig& cfg = {}) {
  if (cfg.thin < 1) throw std::invalid_argument("region summary: thinning must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw std::invalid_argument("region summary: level must lie in (0, 1)");
  std::vector<std::size_t> use;
  for (long i = chain.burn_in; i < chain.size(); i += cfg.thin) use.push_back(static_cast<std::size_t>(i));
  if (use.size() < cfg.min_draws)
    throw std::invalid_argument("region summary: need at least " + std::to_string(cfg.min_draws) +
                                " draws after burn-in and thinning, have " +
                                std::to_string(use.size()));

  const auto& grid = cfg.w_grid;
  const std::size_t g = grid.size();
  const std::size_t np = cfg.probabilities.size();
  const std::size_t nd = use.size();
  std::vector<std::vector<double>> radius(g), sx(g), sy(g);
  std::vector<std::vector<std::vector<double>>> rx(np, std::vector<std::vector<double>>(g)),
      ry(np, std::vector<std::vector<double>>(g));
  for (std::size_t i = 0; i < g; ++i) {
    radius[i].reserve(nd);
    sx[i].reserve(nd);
    sy[i].reserve(nd);
  }
  std::vector<double> nus, p0s, p1s, kappas;
  const double zc = cfg.covariate.value_or(0.0);

  for (std::size_t d : use) {
    const auto& draw = chain.draws[d];
    const double g1 = draw.theta1.gamma, g2 = draw.theta2.gamma;
    auto h = [&](double w) { return angular_density_unchecked(w, draw.eta); };
    const double nu = nu_S(h, g1, g2, cfg.convention, cfg.quadrature);
    const auto boundary = basic_set_boundary(grid, h, g1, g2);
    nus.push_back(nu);
    p0s.push_back(draw.eta.p0());
    p1s.push_back(draw.eta.p1());
    kappas.push_back(draw.eta.kappa);
    for (std::size_t i = 0; i < g; ++i) {
      radius[i].push_back(basic_radius(grid[i], std::max(h(grid[i]), 0.0), g1, g2));
      sx[i].push_back(boundary[i].x);
      sy[i].push_back(boundary[i].y);
    }
    const GevParams t1 = draw.theta1.at(zc), t2 = draw.theta2.at(zc);
    for (std::size_t j = 0; j < np; ++j) {
      const QuantileTarget target{cfg.probabilities[j], chain.k1, chain.k2, chain.n};
      const auto region = quantile_region(target, t1, t2, nu, boundary);
      for (std::size_t i = 0; i < g; ++i) {
        rx[j][i].push_back(region[i].x);
        ry[j][i].push_back(region[i].y);
      }
    }
  }

  RegionSummary out;
  out.draws_used = nd;
  out.inverse_q_star.w = grid;
  detail::band_from_draws(radius, cfg.level, out.inverse_q_star.mean, out.inverse_q_star.lo,
                          out.inverse_q_star.hi);

  auto assemble = [&](const std::vector<std::vector<double>>& xs,
                      const std::vector<std::vector<double>>& ys, double p) {
    RegionCurve c;
    c.w = grid;
    c.p = p;
    c.level = cfg.level;
    std::vector<double> xm, xl, xh, ym, yl, yh;
    detail::band_from_draws(xs, cfg.level, xm, xl, xh);
    detail::band_from_draws(ys, cfg.level, ym, yl, yh);
    for (std::size_t i = 0; i < g; ++i) {
      c.mean.push_back({xm[i], ym[i]});
      c.lo.push_back({xl[i], yl[i]});
      c.hi.push_back({xh[i], yh[i]});
    }
    return c;
  };
  out.basic_set = assemble(sx, sy, kNaN);
  for (std::size_t j = 0; j < np; ++j) out.regions.push_back(assemble(rx[j], ry[j], cfg.probabilities[j]));
  out.nu = summarize_values(nus, cfg.level);
  out.p0 = summarize_values(p0s, cfg.level);
  out.p1 = summarize_values(p1s, cfg.level);
  out.kappa = summarize_values(kappas, cfg.level);
  return out;
}

struct Histogram {
  std::vector<double> edges;    // bins + 1 edges
  std::vector<double> density;  // normalized to integrate to one
};

inline Histogram make_histogram(std::span<const double> values, int bins) {
  if (values.empty() || bins < 1) throw std::invalid_argument("histogram: need values and bins >= 1");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn, hi = *mx;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram hist;
  hist.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) hist.edges[i] = lo + (hi - lo) * i / bins;
  hist.density.assign(bins, 0.0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    auto b = static_cast<int>((v - lo) / width);
    hist.density[std::clamp(b, 0, bins - 1)] += 1.0;
  }
  for (auto& d : hist.density) d /= static_cast<double>(values.size()) * width;
  return hist;
}

struct QuantileSummary {
  double p = kNaN;
  Interval value;      // data scale
  Interval log_value;  // natural log of the quantile; NaN if any draw is not positive
  Histogram histogram; // of log_value when available, else of value
  bool interpolation = false;  // p >= k/n: inside the data range
};

struct QuantileSummaryConfig {
  double level = 0.95;
  int bins = 60;
  std::optional<double> covariate;
};

// Posterior of Q(p) for each p over draws [burn_in, end).
inline std::vector<QuantileSummary> summarize_posterior_quantiles(
    std::span<const MarginalModel> draws, long burn_in, int k, int n,
    std::span<const double> probabilities, const QuantileSummaryConfig& cfg = {}) {
  if (burn_in < 0 || burn_in >= static_cast<long>(draws.size()))
    throw std::invalid_argument("quantile summary: no draws after burn-in");
  std::vector<QuantileSummary> out;
  const double zc = cfg.covariate.value_or(0.0);
  for (double p : probabilities) {
    QuantileSummary s;
    s.p = p;
    s.interpolation = p >= static_cast<double>(k) / n;
    std::vector<double> q, lq;
    bool positive = true;
    for (std::size_t i = static_cast<std::size_t>(burn_in); i < draws.size(); ++i) {
      const double v = extreme_quantile(p, draws[i].at(zc), k, n);
      q.push_back(v);
      if (v > 0.0) lq.push_back(std::log(v));
      else positive = false;
    }
    s.value = summarize_values(q, cfg.level);
    if (positive) {
      s.log_value = summarize_values(lq, cfg.level);
      s.histogram = make_histogram(lq, cfg.bins);
    } else {
      s.histogram = make_histogram(q, cfg.bins);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<QuantileSummary> summarize_posterior_quantiles(
    const UnivariateChain& chain, std::span<const double> probabilities,
    const QuantileSummaryConfig& cfg = {}) {
  return summarize_posterior_quantiles(chain.draws, chain.burn_in, chain.k, chain.n, probabilities,
                                       cfg);
}

}  // namespace xqr
