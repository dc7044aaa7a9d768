#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "spikegap/errors.hpp"
#include "spikegap/model.hpp"
#include "spikegap/numeric.hpp"
#include "spikegap/spectrum.hpp"

namespace spikegap {

namespace detail {

inline void require_quarter(int n) {
  if (n <= 0 || n % 4 != 0) throw DomainError("n must be a positive multiple of 4, got " + std::to_string(n));
}

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace detail

/// log <k|psi_0> of the spikeless ground state at s*.
inline double log_ground_amplitude(int n, int k) {
  return 0.5 * log_binomial(n, k) + k * std::log(0.5) + (n - k) * std::log(std::numbers::sqrt3 / 2);
}

enum class StateKind { ground, first_excited, abs_first_excited };

/// Spikeless eigenstates at s* in closed form, evaluated lazily per k.
struct ClosedFormState {
  StateKind kind = StateKind::ground;
  int n = 4;

  SignedLog amplitude(int k) const {
    if (k < 0 || k > n) return {};
    const double g = log_ground_amplitude(n, k);
    if (kind == StateKind::ground) return {1, g};
    const int c = n - 4 * k;
    if (c == 0) return {};
    const double lm = std::log(std::abs(static_cast<double>(c))) + g - 0.5 * std::log(3.0 * n);
    if (kind == StateKind::abs_first_excited) return {1, lm};
    return {c > 0 ? 1 : -1, lm};
  }

  std::vector<SignedLog> amplitudes() const {
    std::vector<SignedLog> out(n + 1);
    for (int k = 0; k <= n; ++k) out[k] = amplitude(k);
    return out;
  }
};

/// <psi_abs|psi_0> = (sqrt(3n)/2) C(n, n/4) (1/4)^(n/4) (3/4)^(3n/4), exact at finite n.
inline double overlap_abs_ground(int n) {
  detail::require_quarter(n);
  const int q = n / 4;
  const double lg = 0.5 * std::log(3.0 * n) - std::log(2.0) + log_binomial(n, q) + q * std::log(0.25) +
                    (n - q) * std::log(0.75);
  return std::exp(lg);
}

/// <psi_0|H_sp|psi_0> = (3/4) n^alpha <n/4|psi_0>^2 for the width-one spike.
inline double spike_expectation(int n, double alpha) {
  detail::require_quarter(n);
  return std::exp(std::log(0.75) + alpha * std::log(static_cast<double>(n)) + 2.0 * log_ground_amplitude(n, n / 4));
}

/// <psi|H|psi>/<psi|psi> - E_1 for psi = psi_abs + x psi_0 at s*.
inline double rayleigh_quotient(double x, int n, double alpha) {
  const double ov = overlap_abs_ground(n);
  const double sp = spike_expectation(n, alpha);
  if (std::isinf(x)) return 0.5 * sp - 1.0;
  return (-2.0 * x * ov + x * x * (0.5 * sp - 1.0)) / (1.0 + 2.0 * x * ov + x * x);
}

/// First excited energy of the spikeless H at any s.
inline double spikeless_first_excited(int n) { return -0.5 * n + 1.0; }

struct VariationalBound {
  GapEstimate estimate;
  double x = 0.0;          // mixing used for the reported bound
  double witness_x = 0.0;    // the closed-form witness
  double witness_value = 0.0;  // bound evaluated at witness_x
};

namespace detail {

inline GapEstimate bound_estimate(GapMethod method, int n, double alpha) {
  GapEstimate g;
  g.method = method;
  g.s = critical_point();
  g.n = n;
  g.params = SpikeParams::width_one(n, alpha);
  g.precision_bits = kDoubleBits;
  return g;
}

inline void set_value(GapEstimate& g, double v) {
  g.value = v;
  g.log_value = v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

/// Minimum of f over log x: coarse scan then Brent around the best cell.
template <class F>
Minimum minimize_over_log_x(F&& f, double lo = -30.0, double hi = 30.0, int cells = 240) {
  auto g = [&](double lx) { return f(std::exp(lx)); };
  int best = 0;
  double fbest = g(lo);
  for (int i = 1; i <= cells; ++i) {
    const double v = g(lo + (hi - lo) * i / cells);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double a = lo + (hi - lo) * std::max(best - 1, 0) / cells;
  const double b = lo + (hi - lo) * std::min(best + 1, cells) / cells;
  auto m = minimize(g, a, b, 50);
  if (m.f > fbest) m = {lo + (hi - lo) * best / cells, fbest};
  return {std::exp(m.x), m.f};
}

}  // namespace detail

/// Certified lower bound E_1 - min over the psi_abs + x psi_0 family, at s*.
inline VariationalBound lower_bound_gap(int n, double alpha) {
  detail::require_quarter(n);
  VariationalBound out;
  out.estimate = detail::bound_estimate(GapMethod::variational_lower, n, alpha);
  out.witness_x = std::numbers::sqrt3 / 2 * std::pow(static_cast<double>(n), 0.5 - alpha);
  out.witness_value = -rayleigh_quotient(out.witness_x, n, alpha);

  auto rq = [&](double x) { return rayleigh_quotient(x, n, alpha); };
  Minimum best = detail::minimize_over_log_x(rq);
  if (out.witness_value > -best.f) best = {out.witness_x, -out.witness_value};
  const double at_inf = rayleigh_quotient(std::numeric_limits<double>::infinity(), n, alpha);
  if (at_inf < best.f) best = {std::numeric_limits<double>::infinity(), at_inf};

  out.x = best.x;
  const double bound = -best.f;
  if (!(bound > 0.0)) {
    detail::set_value(out.estimate, 0.0);
    out.estimate.flags.set(Flag::vacuous);
  } else {
    detail::set_value(out.estimate, bound);
  }
  return out;
}

/// min_k (H phi)_k / phi_k for positive phi given as log-magnitudes; a lower bound on the
/// ground energy whenever H is stoquastic.
template <class Real = double>
double stoquastic_ground_lower_bound(const TridiagonalOperator<Real>& op, const std::vector<double>& log_phi) {
  const std::size_t m = op.dim();
  if (log_phi.size() != m) throw DomainError("trial vector size does not match the operator");
  for (std::size_t k = 1; k < m; ++k)
    if (op.offdiag[k] > 0) throw DomainError("operator is not stoquastic");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    double r = to_double(op.diag[k]);
    if (k > 0) r += to_double(op.offdiag[k]) * std::exp(log_phi[k - 1] - log_phi[k]);
    if (k + 1 < m) r += to_double(op.offdiag[k + 1]) * std::exp(log_phi[k + 1] - log_phi[k]);
    best = std::min(best, r);
  }
  return best;
}

/// max{3n / (3n + 3n^alpha - 8), 0}.
inline double upper_bound_closed_form(int n, double alpha) {
  const double denom = 3.0 * n + 3.0 * std::pow(static_cast<double>(n), alpha) - 8.0;
  return std::max(3.0 * n / denom, 0.0);
}

/// E_1 - E'_1 at s*; zero when the spikeless first excited level survives the spike.
inline double first_excited_shift(int n, double alpha) {
  const auto op = build_hamiltonian(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
  const auto ev = lowest_eigenvalues(op, 2);
  return spikeless_first_excited(n) - ev[1];
}

/// Upper bound E_1 - min_k (H phi)_k/phi_k with phi = psi_abs + x psi_0, at s*.
inline VariationalBound upper_bound_gap(int n, double alpha) {
  detail::require_quarter(n);
  const double nn = static_cast<double>(n);
  const double denom = 3.0 * std::pow(nn, alpha) - 8.0;
  if (!(denom > 0.0)) throw ConfigError("3 n^alpha - 8 <= 0: the closed-form mixing is undefined");
  VariationalBound out;
  out.estimate = detail::bound_estimate(GapMethod::stoquastic_upper, n, alpha);
  out.witness_x = 4.0 * std::sqrt(3.0 * nn) / denom;
  if (!(alpha > 1.0)) {
    out.estimate.value = std::numeric_limits<double>::infinity();
    out.estimate.log_value = std::numeric_limits<double>::infinity();
    out.estimate.flags.set(Flag::not_applicable);
    out.x = std::numeric_limits<double>::quiet_NaN();
    out.witness_value = std::numeric_limits<double>::infinity();
    return out;
  }

  const auto op = build_hamiltonian(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
  const ClosedFormState abs1{StateKind::abs_first_excited, n};
  std::vector<double> log_abs(n + 1), log_g(n + 1), log_phi(n + 1);
  for (int k = 0; k <= n; ++k) {
    log_abs[k] = abs1.amplitude(k).logmag;
    log_g[k] = log_ground_amplitude(n, k);
  }
  const double e1 = spikeless_first_excited(n);
  auto bound_at = [&](double x) {
    const double lx = std::log(x);
    for (int k = 0; k <= n; ++k) log_phi[k] = detail::log_add(log_abs[k], lx + log_g[k]);
    return e1 - stoquastic_ground_lower_bound(op, log_phi);
  };
  out.witness_value = bound_at(out.witness_x);
  Minimum best = detail::minimize_over_log_x(bound_at);
  if (out.witness_value <= best.f) best = {out.witness_x, out.witness_value};
  out.x = best.x;
  detail::set_value(out.estimate, std::max(best.f, 0.0));
  if (std::abs(first_excited_shift(n, alpha)) > 1e-9 * n) out.estimate.flags.set(Flag::level_mismatch);
  return out;
}

struct BoundPair {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double x_lower = 0.0;
  double x_upper = 0.0;
  Flags flags;
};

inline BoundPair bounds(int n, double alpha) {
  const auto lo = lower_bound_gap(n, alpha);
  BoundPair out;
  out.lower = lo.estimate.value;
  out.x_lower = lo.x;
  out.flags.merge(lo.estimate.flags);
  const double denom = 3.0 * std::pow(static_cast<double>(n), alpha) - 8.0;
  if (denom > 0.0) {
    const auto up = upper_bound_gap(n, alpha);
    out.upper = up.estimate.value;
    out.x_upper = up.x;
    out.flags.merge(up.estimate.flags);
  } else {
    out.x_upper = std::numeric_limits<double>::quiet_NaN();
    out.flags.set(Flag::not_applicable);
  }
  return out;
}

}  // namespace spikegap
