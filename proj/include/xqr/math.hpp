#pragma once

// Scalar special functions shared by the dependence, regions and testbed
// modules. Distribution functions are delegated to Boost.Math.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace xqr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// x * log(y) with the 0 * log(0) = 0 convention.
inline double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

// Log of the Beta(a, b) density at x in [0, 1]. Evaluated through lgamma so
// that the endpoints give finite values when the exponent vanishes.
inline double log_beta_density(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) return -kInf;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return log_norm + xlogy(a - 1.0, x) + xlogy(b - 1.0, 1.0 - x);
}

inline double beta_density(double x, double a, double b) {
  return std::exp(log_beta_density(x, a, b));
}

// Bernstein basis of degree n at v: out[j] = C(n, j) v^j (1 - v)^(n - j),
// j = 0..n. `out` must hold n + 1 values.
inline void bernstein_basis(int n, double v, std::span<double> out) {
  if (static_cast<int>(out.size()) < n + 1)
    throw std::invalid_argument("bernstein_basis: output span too small");
  // de Casteljau style triangular recursion keeps every term in [0, 1].
  const double u = 1.0 - v;
  out[0] = 1.0;
  for (int d = 1; d <= n; ++d) {
    double carry = 0.0;
    for (int j = 0; j < d; ++j) {
      const double prev = out[j];
      out[j] = carry + u * prev;
      carry = v * prev;
    }
    out[d] = carry;
  }
}

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

inline double student_t_cdf(double x, double dof) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(dof), x);
}

inline double student_t_pdf(double x, double dof) {
  return boost::math::pdf(boost::math::students_t_distribution<double>(dof), x);
}

inline double student_t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

}  // namespace xqr
