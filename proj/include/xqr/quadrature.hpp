#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
// The interval with the largest error estimate is bisected until the total
// error meets the tolerance. Nodes never touch the interval ends, so
// integrable endpoint singularities are resolved by repeated subdivision.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace xqr {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  int evaluations = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult partial)
      : std::runtime_error(what), result(partial) {}
  QuadratureResult result;
};

namespace detail {

// Abscissae (positive half) and weights of the 15-point Kronrod rule and the
// embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kWgk[i] * pair;
    if (i % 2 == 1) gauss += kWg[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    const QuadratureOptions& opt = {}) {
  std::priority_queue<detail::Segment> work;
  auto first = detail::gk15(f, a, b);
  QuadratureResult res;
  res.value = first.value;
  res.abs_error = first.error;
  res.intervals = 1;
  res.evaluations = 15;
  work.push(first);

  while (res.abs_error > std::max(opt.abs_tol, opt.rel_tol * std::abs(res.value))) {
    if (res.intervals >= opt.max_intervals) return res;
    auto worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) return res;  // interval exhausted
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    res.value += left.value + right.value - worst.value;
    res.abs_error += left.error + right.error - worst.error;
    res.evaluations += 30;
    ++res.intervals;
    work.push(left);
    work.push(right);
    if (work.size() % 64 == 0) {
      // Re-accumulate to shed round-off from the running updates.
      auto copy = work;
      double v = 0.0, e = 0.0;
      while (!copy.empty()) {
        v += copy.top().value;
        e += copy.top().error;
        copy.pop();
      }
      res.value = v;
      res.abs_error = e;
    }
  }
  res.converged = true;
  return res;
}

// Throws QuadratureError carrying the partial result when the tolerance is
// not reached.
template <class F>
double integrate_or_throw(const F& f, double a, double b,
                          const QuadratureOptions& opt = {},
                          const char* what = "integral") {
  auto res = integrate_adaptive(f, a, b, opt);
  if (!res.converged || !std::isfinite(res.value)) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge (value " << res.value
        << ", error estimate " << res.abs_error << ", intervals " << res.intervals
        << ")";
    throw QuadratureError(msg.str(), res);
  }
  return res.value;
}

}  // namespace xqr
