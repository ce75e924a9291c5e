#pragma once

// Simulation distributions with known tail behaviour, their closed-form
// angular densities and marginal quantiles, and the exponent function of the
// positive-quadrant extremal-t model.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "xqr/math.hpp"
#include "xqr/quadrature.hpp"
#include "xqr/regions.hpp"

namespace xqr {

enum class Testbed { frechet, half_t, inv_gamma, cauchy2, trunc_t2, asymmetric, clover };

inline Testbed parse_testbed(const std::string& s) {
  if (s == "frechet") return Testbed::frechet;
  if (s == "half-t" || s == "half_t") return Testbed::half_t;
  if (s == "inv-gamma" || s == "inv_gamma") return Testbed::inv_gamma;
  if (s == "cauchy" || s == "cauchy2") return Testbed::cauchy2;
  if (s == "trunc-t" || s == "trunc_t2") return Testbed::trunc_t2;
  if (s == "asymmetric") return Testbed::asymmetric;
  if (s == "clover") return Testbed::clover;
  throw std::invalid_argument("unknown testbed '" + s + "'");
}

inline const char* to_string(Testbed t) {
  switch (t) {
    case Testbed::frechet: return "frechet";
    case Testbed::half_t: return "half-t";
    case Testbed::inv_gamma: return "inv-gamma";
    case Testbed::cauchy2: return "cauchy";
    case Testbed::trunc_t2: return "trunc-t";
    case Testbed::asymmetric: return "asymmetric";
    case Testbed::clover: return "clover";
  }
  return "?";
}

// Normalizing constants of the asymmetric density c / (x1^3 + x2^4 + 1) and
// its angular density, and of the clover angular density.
namespace constants {
inline constexpr double asymmetric_c = 0.5807058558698932;
inline constexpr double asymmetric_c1 = 0.5890075441301108;
inline constexpr double asymmetric_c2 = 0.5953375355082892;
inline constexpr double clover_c = 5.0 / 24.0;
}  // namespace constants

struct TestbedSpec {
  Testbed kind = Testbed::frechet;
  // Frechet: psi + varsigma (-log U)^{-1/xi}
  double psi = 3.0, varsigma = 1.0, xi = 1.0 / 3.0;
  // Half-t: |t_dof| * scale
  double scale = 1.0, dof = 1.0 / 3.0;
  // Inverse gamma: ig_scale / Gamma(shape, 1)
  double shape = 0.5, ig_scale = 1.0;
  // Truncated bivariate t on the positive quadrant
  double nu = 2.0, rho = 0.5;

  static TestbedSpec of(Testbed t) {
    TestbedSpec s;
    s.kind = t;
    return s;
  }

  bool bivariate() const {
    return kind == Testbed::cauchy2 || kind == Testbed::trunc_t2 || kind == Testbed::asymmetric ||
           kind == Testbed::clover;
  }

  // Marginal tail indices; both entries equal for univariate testbeds.
  std::array<double, 2> tail_indices() const {
    switch (kind) {
      case Testbed::frechet: return {1.0 / xi, 1.0 / xi};
      case Testbed::half_t: return {1.0 / dof, 1.0 / dof};
      case Testbed::inv_gamma: return {1.0 / shape, 1.0 / shape};
      case Testbed::cauchy2: return {1.0, 1.0};
      case Testbed::trunc_t2: return {1.0 / nu, 1.0 / nu};
      case Testbed::asymmetric: return {0.8, 0.6};
      case Testbed::clover: return {1.0, 1.25};
    }
    return {kNaN, kNaN};
  }
};

// ---------------------------------------------------------------------------
// Univariate testbeds

// Upper quantile: x with P(X > x) = p.
inline double true_univariate_quantile(const TestbedSpec& s, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("true_univariate_quantile: p must lie in (0, 1)");
  switch (s.kind) {
    case Testbed::frechet:
      return s.psi + s.varsigma * std::pow(-std::log1p(-p), -1.0 / s.xi);
    case Testbed::half_t: {
      boost::math::students_t_distribution<double> t(s.dof);
      return s.scale * boost::math::quantile(boost::math::complement(t, 0.5 * p));
    }
    case Testbed::inv_gamma:
      return s.ig_scale / boost::math::gamma_p_inv(s.shape, p);
    default:
      throw std::invalid_argument("true_univariate_quantile: not a univariate testbed");
  }
}

template <class Rng>
std::vector<double> sample_univariate(const TestbedSpec& s, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample: n must be positive");
  if (s.bivariate()) throw std::invalid_argument("sample_univariate: testbed is bivariate");
  std::vector<double> out(n);
  std::uniform_real_distribution<double> unif;
  for (auto& x : out) {
    double u = unif(rng);
    while (u == 0.0) u = unif(rng);
    switch (s.kind) {
      case Testbed::frechet:
        x = s.psi + s.varsigma * std::pow(-std::log(u), -1.0 / s.xi);
        break;
      case Testbed::half_t:
      case Testbed::inv_gamma:
        // u is the upper-tail probability.
        x = true_univariate_quantile(s, u);
        break;
      default:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bivariate testbeds

namespace detail {

inline double trunc_t_scale(double nu, double rho) { return std::sqrt((nu + 1.0) / (1.0 - rho * rho)); }

inline double trunc_t_denominator(double nu, double rho) {
  return 1.0 - student_t_cdf(-rho * trunc_t_scale(nu, rho), nu + 1.0);
}

// P(X in positive quadrant) for a centred elliptical pair with correlation rho.
inline double positive_quadrant_probability(double rho) {
  return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
}

inline double clover_angle_density(double phi) {
  const double s = std::sin(2.0 * phi);
  return (1.0 - 0.75 * s * s) * 16.0 / (5.0 * std::numbers::pi);
}

}  // namespace detail

inline double true_angular_density(const TestbedSpec& s, double w) {
  if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("true_angular_density: w must lie in (0, 1)");
  const double u = 1.0 - w;
  switch (s.kind) {
    case Testbed::cauchy2:
      return 0.5 * std::pow(w * w + u * u, -1.5);
    case Testbed::trunc_t2: {
      const double a = detail::trunc_t_scale(s.nu, s.rho);
      const double ratio = u / w;
      return a / (2.0 * s.nu * w * w * w) * std::pow(ratio, (1.0 - s.nu) / s.nu) *
             student_t_pdf(a * (std::pow(ratio, 1.0 / s.nu) - s.rho), s.nu + 1.0) /
             detail::trunc_t_denominator(s.nu, s.rho);
    }
    case Testbed::asymmetric: {
      using namespace constants;
      const double g1 = 0.8, g2 = 0.6;
      const double a = asymmetric_c1 * std::pow(w, g1);
      const double b = asymmetric_c2 * std::pow(u, g2);
      return 6.0 * asymmetric_c / 25.0 * asymmetric_c1 * asymmetric_c2 /
             ((a * a * a + b * b * b * b) * std::pow(w, 1.0 - g1) * std::pow(u, 1.0 - g2));
    }
    case Testbed::clover: {
      const double w2 = w * w, u2 = u * u;
      return 4.0 * constants::clover_c * (w2 * w2 - w2 * u2 + u2 * u2) / std::pow(w2 + u2, 3.5);
    }
    default:
      throw std::invalid_argument("true_angular_density: not a bivariate testbed");
  }
}

inline double true_q_star(const TestbedSpec& s, double w) {
  const auto g = s.tail_indices();
  return angular_basic_density(w, true_angular_density(s, w), g[0], g[1]);
}

// Joint density on the positive quadrant.
inline double bivariate_density(const TestbedSpec& s, double x1, double x2) {
  if (!(x1 >= 0.0 && x2 >= 0.0)) return 0.0;
  switch (s.kind) {
    case Testbed::cauchy2:
      return 2.0 / (std::numbers::pi * std::pow(1.0 + x1 * x1 + x2 * x2, 1.5));
    case Testbed::trunc_t2: {
      const double r2 = 1.0 - s.rho * s.rho;
      const double q = (x1 * x1 - 2.0 * s.rho * x1 * x2 + x2 * x2) / r2;
      const double t = std::pow(1.0 + q / s.nu, -(s.nu + 2.0) / 2.0) /
                       (2.0 * std::numbers::pi * std::sqrt(r2));
      return t / detail::positive_quadrant_probability(s.rho);
    }
    case Testbed::asymmetric:
      return constants::asymmetric_c / (x1 * x1 * x1 + x2 * x2 * x2 * x2 + 1.0);
    case Testbed::clover: {
      const double v = std::pow(x2 + 1.0, 0.8) - 1.0;
      const double s2 = x1 * x1 + v * v;
      if (s2 == 0.0) return 64.0 / (25.0 * std::numbers::pi);
      const double num = s2 * s2 - 3.0 * x1 * x1 * v * v;
      return 64.0 / (25.0 * std::numbers::pi) * num /
             (std::pow(x2 + 1.0, 0.2) * std::pow(1.0 + s2, 1.5) * s2 * s2);
    }
    default:
      throw std::invalid_argument("bivariate_density: not a bivariate testbed");
  }
}

// P(X_which > y) for a bivariate testbed.
inline double true_marginal_survival(const TestbedSpec& s, int which, double y) {
  if (which != 1 && which != 2) throw std::invalid_argument("margin index must be 1 or 2");
  if (y <= 0.0) return 1.0;
  const QuadratureOptions opt{1e-12, 1e-300, 20000};
  switch (s.kind) {
    case Testbed::cauchy2:
      return 1.0 - 2.0 / std::numbers::pi * std::atan(y);
    case Testbed::trunc_t2: {
      // f(x) P(X2 > 0 | X1 = x) / P(quadrant), X2 | X1 = x is t_{nu+1}
      // with location rho x and scale sqrt((nu + x^2)(1 - rho^2)/(nu + 1)).
      auto f = [&](double x) {
        const double sc = std::sqrt((s.nu + x * x) * (1.0 - s.rho * s.rho) / (s.nu + 1.0));
        return student_t_pdf(x, s.nu) * student_t_cdf(s.rho * x / sc, s.nu + 1.0);
      };
      // x = y / t maps (0, 1] onto [y, inf).
      auto g = [&](double t) { return f(y / t) * y / (t * t); };
      return integrate_or_throw(g, 0.0, 1.0, opt, "truncated-t survival") /
             detail::positive_quadrant_probability(s.rho);
    }
    case Testbed::asymmetric: {
      // Marginal densities c k1 (1 + x^3)^{-3/4} and c k2 (1 + x^4)^{-2/3}.
      const double k = which == 1 ? std::numbers::pi / (2.0 * std::numbers::sqrt2)
                                  : 2.0 * std::numbers::pi / (3.0 * std::numbers::sqrt3);
      auto f = [&](double x) {
        return which == 1 ? std::pow(1.0 + x * x * x, -0.75) : std::pow(1.0 + x * x * x * x, -2.0 / 3.0);
      };
      auto g = [&](double t) { return f(y / t) * y / (t * t); };
      return constants::asymmetric_c * k * integrate_or_throw(g, 0.0, 1.0, opt, "asymmetric survival");
    }
    case Testbed::clover: {
      // Polar construction: r has survival (1 + r^2)^{-1/2}; the first
      // coordinate is r cos(phi), the second (r sin(phi) + 1)^{5/4} - 1.
      const double x = which == 1 ? y : std::pow(y + 1.0, 0.8) - 1.0;
      auto g = [&](double phi) {
        const double c = std::cos(phi);
        return detail::clover_angle_density(phi) / std::sqrt(1.0 + x * x / (c * c));
      };
      return integrate_or_throw(g, 0.0, 0.5 * std::numbers::pi, opt, "clover survival");
    }
    default:
      throw std::invalid_argument("true_marginal_survival: not a bivariate testbed");
  }
}

// y with P(X_which > y) = p.
inline double true_marginal_quantile(const TestbedSpec& s, int which, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("true_marginal_quantile: p must lie in (0, 1)");
  if (s.kind == Testbed::cauchy2) return std::tan(0.5 * std::numbers::pi * (1.0 - p));
  // Root in log y of log S(y) - log p.
  auto f = [&](double ly) { return std::log(true_marginal_survival(s, which, std::exp(ly))) - std::log(p); };
  double lo = -5.0, hi = 5.0;
  while (f(lo) < 0.0) lo -= 5.0;
  while (f(hi) > 0.0) hi += 5.0;
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                             iters);
  return std::exp(0.5 * (r.first + r.second));
}

template <class Rng>
std::pair<std::vector<double>, std::vector<double>> sample_bivariate(const TestbedSpec& s, int n,
                                                                     Rng& rng,
                                                                     long max_tries = 1L << 24) {
  if (n < 1) throw std::invalid_argument("sample: n must be positive");
  std::vector<double> x1, x2;
  x1.reserve(n);
  x2.reserve(n);
  std::uniform_real_distribution<double> unif;
  std::normal_distribution<double> normal;
  auto positive_uniform = [&] {
    double u = unif(rng);
    while (u == 0.0) u = unif(rng);
    return u;
  };
  long tries = 0;
  auto budget = [&] {
    if (++tries > max_tries) throw std::runtime_error("sample: rejection budget exhausted");
  };

  switch (s.kind) {
    case Testbed::cauchy2: {
      while (static_cast<int>(x1.size()) < n) {
        const double z1 = normal(rng), z2 = normal(rng), z3 = std::abs(normal(rng));
        if (z3 == 0.0) continue;
        x1.push_back(std::abs(z1) / z3);
        x2.push_back(std::abs(z2) / z3);
      }
      break;
    }
    case Testbed::trunc_t2: {
      std::chi_squared_distribution<double> chi(s.nu);
      const double r = std::sqrt(1.0 - s.rho * s.rho);
      while (static_cast<int>(x1.size()) < n) {
        budget();
        const double z1 = normal(rng);
        const double z2 = s.rho * z1 + r * normal(rng);
        if (z1 <= 0.0 || z2 <= 0.0) continue;
        const double scale = std::sqrt(chi(rng) / s.nu);
        if (!(scale > 0.0)) continue;
        x1.push_back(z1 / scale);
        x2.push_back(z2 / scale);
      }
      break;
    }
    case Testbed::asymmetric: {
      // X1 has density proportional to (1 + x^3)^{-3/4}: rejection from
      // (5/4)(1 + x)^{-9/4}, ratio ((1 + x)^3 / (1 + x^3))^{3/4} <= 4^{3/4}.
      // X2 | X1 = (1 + X1^3)^{1/4} U with U proportional to 1 / (1 + u^4):
      // rejection from the half-Cauchy, ratio (1 + u^2)/(1 + u^4) <= (1 + sqrt 2)/2.
      const double bound1 = std::pow(4.0, 0.75);
      const double bound2 = 0.5 * (1.0 + std::numbers::sqrt2);
      while (static_cast<int>(x1.size()) < n) {
        double a;
        for (;;) {
          budget();
          a = std::pow(positive_uniform(), -0.8) - 1.0;
          const double ratio = std::pow((1.0 + a) * (1.0 + a) * (1.0 + a) / (1.0 + a * a * a), 0.75);
          if (unif(rng) * bound1 <= ratio) break;
        }
        double b;
        for (;;) {
          budget();
          b = std::tan(0.5 * std::numbers::pi * unif(rng));
          const double b2 = b * b;
          if (unif(rng) * bound2 <= (1.0 + b2) / (1.0 + b2 * b2)) break;
        }
        x1.push_back(a);
        x2.push_back(std::pow(1.0 + a * a * a, 0.25) * b);
      }
      break;
    }
    case Testbed::clover: {
      // Radius with survival (1 + r^2)^{-1/2}, angle on [0, pi/2] with density
      // proportional to 1 - (3/4) sin^2(2 phi), then x2 = (v + 1)^{5/4} - 1.
      while (static_cast<int>(x1.size()) < n) {
        double phi;
        for (;;) {
          budget();
          phi = 0.5 * std::numbers::pi * unif(rng);
          const double sn = std::sin(2.0 * phi);
          if (unif(rng) <= 1.0 - 0.75 * sn * sn) break;
        }
        const double v = positive_uniform();
        const double r = std::sqrt((1.0 - v) * (1.0 + v)) / v;
        x1.push_back(r * std::cos(phi));
        x2.push_back(std::pow(r * std::sin(phi) + 1.0, 1.25) - 1.0);
      }
      break;
    }
    default:
      throw std::invalid_argument("sample_bivariate: testbed is univariate");
  }
  return {std::move(x1), std::move(x2)};
}

// ---------------------------------------------------------------------------
// Exponent function of the positive-quadrant extremal-t model in unit-Frechet
// margins.

inline double extremal_t_exponent(double x, double y, double rho, double nu) {
  if (!(x > 0.0 && y > 0.0)) throw std::invalid_argument("extremal_t_exponent: x and y must be positive");
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("extremal_t_exponent: |rho| must be < 1");
  if (!(nu > 0.0)) throw std::invalid_argument("extremal_t_exponent: nu must be positive");
  const double a = detail::trunc_t_scale(nu, rho);
  const double base = student_t_cdf(-rho * a, nu + 1.0);
  const double t1 = student_t_cdf(a * (std::pow(y / x, 1.0 / nu) - rho), nu + 1.0) - base;
  const double t2 = student_t_cdf(a * (std::pow(x / y, 1.0 / nu) - rho), nu + 1.0) - base;
  return (t1 / x + t2 / y) / (1.0 - base);
}

// ---------------------------------------------------------------------------
// True curves for a bivariate testbed

struct TrueRegions {
  std::vector<double> w;
  std::vector<double> inverse_q_star;
  std::vector<Point2> basic_set;
  double nu = kNaN;
  std::vector<std::vector<Point2>> regions;  // one per probability
};

// The true basic set mapped through the exact marginal upper quantiles:
// y_i = F_i^{-1}(1 - p / (nu(S) x_i)).
inline TrueRegions true_regions(const TestbedSpec& s, std::span<const double> w_grid,
                                std::span<const double> probabilities,
                                NuConvention convention = NuConvention::radius_weighted) {
  const auto g = s.tail_indices();
  auto h = [&](double w) { return true_angular_density(s, w); };
  TrueRegions out;
  out.w.assign(w_grid.begin(), w_grid.end());
  out.nu = nu_S(h, g[0], g[1], convention, QuadratureOptions{1e-10, 1e-14, 20000});
  out.basic_set = basic_set_boundary(w_grid, h, g[0], g[1]);
  for (double w : w_grid) out.inverse_q_star.push_back(basic_radius(w, h(w), g[0], g[1]));
  for (double p : probabilities) {
    std::vector<Point2> curve;
    for (const auto& b : out.basic_set) {
      const double p1 = p / (out.nu * b.x), p2 = p / (out.nu * b.y);
      curve.push_back({p1 < 1.0 ? true_marginal_quantile(s, 1, p1) : 0.0,
                       p2 < 1.0 ? true_marginal_quantile(s, 2, p2) : 0.0});
    }
    out.regions.push_back(std::move(curve));
  }
  return out;
}

}  // namespace xqr
