#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "spikegap/errors.hpp"

namespace spikegap {

/// A real number stored as sign and natural log of its magnitude.
struct SignedLog {
  int sign = 0;  // -1, 0, +1
  double logmag = -std::numeric_limits<double>::infinity();

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(logmag); }

  static SignedLog from(double x) {
    if (x == 0.0) return {};
    return {x > 0 ? 1 : -1, std::log(std::abs(x))};
  }
};

inline double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Exact-as-Real binomial coefficient by the multiplicative formula (small n only).
template <class Real>
Real binomial(int n, int k) {
  if (k < 0 || k > n) return Real(0);
  k = std::min(k, n - k);
  Real out(1);
  for (int j = 1; j <= k; ++j) {
    out *= Real(n - k + j);
    out /= Real(j);
  }
  return out;
}

/// log(sum exp(x_i)); -inf for an empty range.
template <class Range>
double logsumexp(const Range& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

/// acosh(1 + x) without cancellation for small x >= 0.
inline double acosh1p(double x) { return std::log1p(x + std::sqrt(x * (2.0 + x))); }

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod on [a, b] after the map x = a + (b - a)(1 - cos(pi t))/2.
/// The map squashes square-root endpoint behaviour into smooth integrands.
template <class F>
IntegralResult integrate_endpoints(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 20) {
  if (a == b) return {};
  const double half = 0.5 * (b - a);
  auto g = [&](double t) {
    const double c = std::cos(std::numbers::pi * t);
    const double x = a + half * (1.0 - c);
    return f(x) * half * std::numbers::pi * std::sin(std::numbers::pi * t);
  };
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, max_depth, rel_tol, &err);
  return {v, err};
}

/// Plain adaptive Gauss-Kronrod on [a, b].
template <class F>
IntegralResult integrate(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 20) {
  if (a == b) return {};
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err);
  return {v, err};
}

struct Minimum {
  double x = 0.0;
  double f = 0.0;
};

/// Brent minimisation on [a, b] (golden section with parabolic steps).
template <class F>
Minimum minimize(F&& f, double a, double b, int bits = 40, std::uintmax_t max_iter = 200) {
  auto [x, fx] = boost::math::tools::brent_find_minima(f, a, b, bits, max_iter);
  return {x, fx};
}

/// Bracketed root of f on [a, b]; f(a), f(b) must differ in sign.
template <class F>
double find_root(F&& f, double a, double b, double fa, double fb, double abs_tol = 1e-13,
                 std::uintmax_t max_iter = 200) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw NotFoundError("root is not bracketed");
  auto tol = [abs_tol](double lo, double hi) { return std::abs(hi - lo) <= abs_tol; };
  auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
  return 0.5 * (lo + hi);
}

template <class F>
double find_root(F&& f, double a, double b, double abs_tol = 1e-13) {
  return find_root(f, a, b, f(a), f(b), abs_tol);
}

/// Ordinary least squares y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw DomainError("least squares needs at least two matched points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least squares with a single distinct abscissa");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace spikegap
