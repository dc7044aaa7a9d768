#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spikegap/errors.hpp"
#include "spikegap/model.hpp"
#include "spikegap/numeric.hpp"
#include "spikegap/precision.hpp"

namespace spikegap {

template <class Real>
struct SpectralBounds {
  Real lower;
  Real upper;
  Real radius;  // max(|lower|, |upper|)
};

template <class Real>
SpectralBounds<Real> gershgorin(const TridiagonalOperator<Real>& op) {
  using std::abs;
  const std::size_t m = op.dim();
  Real lo = op.diag[0], hi = op.diag[0];
  for (std::size_t k = 0; k < m; ++k) {
    Real r = abs(op.offdiag[k]);
    if (k + 1 < m) r += abs(op.offdiag[k + 1]);
    lo = std::min<Real>(lo, op.diag[k] - r);
    hi = std::max<Real>(hi, op.diag[k] + r);
  }
  Real radius = std::max<Real>(abs(lo), abs(hi));
  if (radius == 0) radius = Real(1);
  return {lo, hi, radius};
}

/// Sturm-sequence helper with the squared couplings and pivot guard cached.
template <class Real>
class SturmCounter {
 public:
  explicit SturmCounter(const TridiagonalOperator<Real>& op) : op_(op), e2_(op.dim()) {
    Real emax(0);
    for (std::size_t k = 0; k < op.dim(); ++k) {
      e2_[k] = op.offdiag[k] * op.offdiag[k];
      emax = std::max<Real>(emax, e2_[k]);
    }
    pivmin_ = std::numeric_limits<Real>::min() * std::max<Real>(Real(1), emax);
  }

  /// Number of eigenvalues strictly below lambda.
  std::size_t count(const Real& lambda) const {
    using std::abs;
    std::size_t c = 0;
    Real q = op_.diag[0] - lambda;
    if (abs(q) < pivmin_) q = -pivmin_;
    if (q < 0) ++c;
    for (std::size_t k = 1; k < op_.dim(); ++k) {
      q = (op_.diag[k] - lambda) - e2_[k] / q;
      if (abs(q) < pivmin_) q = -pivmin_;
      if (q < 0) ++c;
    }
    return c;
  }

  const Real& pivmin() const { return pivmin_; }

 private:
  const TridiagonalOperator<Real>& op_;
  std::vector<Real> e2_;
  Real pivmin_;
};

inline void check_precision_request(int bits, int backend) {
  if (bits > kMaxPrecisionBits)
    throw ConfigError("precision_bits " + std::to_string(bits) + " exceeds the backend cap of " +
                      std::to_string(kMaxPrecisionBits));
  if (bits <= 0) throw ConfigError("precision_bits must be positive");
  if (bits > backend)
    throw ConfigError("precision_bits " + std::to_string(bits) + " exceeds the " + std::to_string(backend) +
                      "-bit arithmetic of this operator");
}

/// Bisection brackets of the `count` smallest eigenvalues, refined to 2^-bits * radius.
template <class Real>
std::vector<Real> lowest_eigenvalues(const TridiagonalOperator<Real>& op, std::size_t count,
                                     int precision_bits = mantissa_bits<Real>) {
  check_precision_request(precision_bits, mantissa_bits<Real>);
  if (count < 1 || count > op.dim()) throw DomainError("eigenvalue count must lie in [1, dim]");
  using std::ldexp;
  const auto b = gershgorin(op);
  const Real width = ldexp(b.radius, -precision_bits);
  const SturmCounter<Real> sturm(op);
  std::vector<Real> lo(count, b.lower), hi(count, b.upper);
  // widen by a hair so the counts at the ends are exact
  const Real pad = ldexp(b.radius, -mantissa_bits<Real> + 3);
  for (auto& v : lo) v -= pad;
  for (auto& v : hi) v += pad;
  for (std::size_t j = 0; j < count; ++j) {
    while (hi[j] - lo[j] > width) {
      const Real mid = (lo[j] + hi[j]) / 2;
      if (mid <= lo[j] || mid >= hi[j]) break;
      const std::size_t c = sturm.count(mid);
      // one count refines every bracket it separates
      for (std::size_t i = j; i < count; ++i) {
        if (i < c)
          hi[i] = std::min<Real>(hi[i], mid);
        else
          lo[i] = std::max<Real>(lo[i], mid);
      }
    }
  }
  std::vector<Real> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = (lo[j] + hi[j]) / 2;
  return out;
}

/// Number of eigenvalues strictly below lambda.
template <class Real>
std::size_t sturm_count(const TridiagonalOperator<Real>& op, const Real& lambda) {
  return SturmCounter<Real>(op).count(lambda);
}

struct EigenPair {
  double value = 0.0;
  std::vector<SignedLog> vector;
  int precision_bits = kDoubleBits;
  double residual = 0.0;     // ||H v - lambda v||_2
  double operator_norm = 0.0;  // Gershgorin radius used as ||H||
  std::size_t twist_index = 0;

  std::vector<double> amplitudes() const {
    std::vector<double> out(vector.size());
    for (std::size_t k = 0; k < vector.size(); ++k) out[k] = vector[k].value();
    return out;
  }
};

namespace detail {

template <class Real>
Real guarded(const Real& q, const Real& pivmin) {
  using std::abs;
  return abs(q) < pivmin ? -pivmin : q;
}

/// Eigenvalues with index in [first, last) by bisection; used to measure a cluster.
template <class Real>
std::vector<Real> eigenvalue_range(const TridiagonalOperator<Real>& op, std::size_t first, std::size_t last) {
  if (last <= first) return {};
  auto all = lowest_eigenvalues(op, last);
  return {all.begin() + static_cast<std::ptrdiff_t>(first), all.end()};
}

}  // namespace detail

/// Eigenvector of an isolated eigenvalue by twisted factorisation, kept as sign + log|v_k|.
template <class Real>
EigenPair eigenvector(const TridiagonalOperator<Real>& op, const Real& lambda,
                      int precision_bits = mantissa_bits<Real>) {
  using std::abs;
  using std::ldexp;
  using std::log;
  check_precision_request(precision_bits, mantissa_bits<Real>);
  const std::size_t m = op.dim();
  const auto bounds = gershgorin(op);
  const SturmCounter<Real> sturm(op);

  // isolation: refuse when another eigenvalue sits within the resolution window
  const Real delta = ldexp(bounds.radius, -precision_bits + 4);
  const std::size_t below = sturm.count(lambda - delta);
  const std::size_t upto = sturm.count(lambda + delta);
  if (upto > below + 1) {
    auto cluster = detail::eigenvalue_range(op, below, upto);
    const double width = to_double(cluster.back() - cluster.front());
    throw NearDegenerateError(width, upto - below);
  }

  const Real pivmin = sturm.pivmin();
  std::vector<Real> dplus(m), dminus(m);
  dplus[0] = detail::guarded<Real>(op.diag[0] - lambda, pivmin);
  for (std::size_t k = 1; k < m; ++k)
    dplus[k] = detail::guarded<Real>((op.diag[k] - lambda) - op.offdiag[k] * op.offdiag[k] / dplus[k - 1], pivmin);
  dminus[m - 1] = detail::guarded<Real>(op.diag[m - 1] - lambda, pivmin);
  for (std::size_t k = m - 1; k-- > 0;)
    dminus[k] =
        detail::guarded<Real>((op.diag[k] - lambda) - op.offdiag[k + 1] * op.offdiag[k + 1] / dminus[k + 1], pivmin);

  std::size_t r = 0;
  Real best = abs(dplus[0] + dminus[0] - (op.diag[0] - lambda));
  for (std::size_t k = 1; k < m; ++k) {
    const Real g = abs(dplus[k] + dminus[k] - (op.diag[k] - lambda));
    if (g < best) {
      best = g;
      r = k;
    }
  }

  std::vector<SignedLog> z(m);
  z[r] = {1, 0.0};
  for (std::size_t k = r; k-- > 0;) {
    if (z[k + 1].sign == 0 || op.offdiag[k + 1] == 0) {
      z[k] = {};
      continue;
    }
    const Real ratio = -op.offdiag[k + 1] / dplus[k];
    z[k] = {z[k + 1].sign * (ratio > 0 ? 1 : -1), z[k + 1].logmag + to_double(log(abs(ratio)))};
  }
  for (std::size_t k = r + 1; k < m; ++k) {
    if (z[k - 1].sign == 0 || op.offdiag[k] == 0) {
      z[k] = {};
      continue;
    }
    const Real ratio = -op.offdiag[k] / dminus[k];
    z[k] = {z[k - 1].sign * (ratio > 0 ? 1 : -1), z[k - 1].logmag + to_double(log(abs(ratio)))};
  }

  std::vector<double> twice(m);
  for (std::size_t k = 0; k < m; ++k) twice[k] = 2.0 * z[k].logmag;
  const double half_norm = 0.5 * logsumexp(twice);
  for (auto& c : z)
    if (c.sign != 0) c.logmag -= half_norm;

  EigenPair out;
  out.value = to_double(lambda);
  out.vector = std::move(z);
  out.precision_bits = precision_bits;
  out.operator_norm = to_double(bounds.radius);
  out.twist_index = r;

  // residual with the stored double amplitudes; negligible tails underflow to 0 harmlessly
  const auto v = out.amplitudes();
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    Real rk = (op.diag[k] - lambda) * Real(v[k]);
    if (k > 0) rk += op.offdiag[k] * Real(v[k - 1]);
    if (k + 1 < m) rk += op.offdiag[k + 1] * Real(v[k + 1]);
    const double d = to_double(rk);
    acc += d * d;
  }
  out.residual = std::sqrt(acc);
  return out;
}

enum class GapMethod { exact, variational_lower, stoquastic_upper, instanton_exponent, wkb };

inline const char* to_string(GapMethod m) {
  switch (m) {
    case GapMethod::exact:
      return "exact";
    case GapMethod::variational_lower:
      return "variational_lower";
    case GapMethod::stoquastic_upper:
      return "stoquastic_upper";
    case GapMethod::instanton_exponent:
      return "instanton_exponent";
    default:
      return "wkb";
  }
}

struct GapEstimate {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  GapMethod method = GapMethod::exact;
  double s = 0.0;
  int n = 0;
  std::optional<SpikeParams> params;
  int precision_bits = kDoubleBits;
  Flags flags;

  bool resolved() const { return !flags.has(Flag::unresolved); }
};

/// Gap of the normalised interpolation (1-s) H_B + s H_P from the gap of H(s).
inline GapEstimate to_interpolated(const GapEstimate& g) {
  GapEstimate out = g;
  const double f = AdiabaticPoint(g.s).norm_factor;
  out.value *= f;
  out.log_value += std::log(f);
  return out;
}

namespace detail {

template <class Real>
GapEstimate gap_at(const CostModel& cost, double s, int bits) {
  using std::ldexp;
  using std::log;
  const auto op = build_hamiltonian<Real>(cost, s);
  const auto ev = lowest_eigenvalues(op, 2, bits);
  const auto b = gershgorin(op);
  const Real g = ev[1] - ev[0];
  GapEstimate out;
  out.method = GapMethod::exact;
  out.s = s;
  out.n = cost.n();
  if (cost.kind() == CostKind::spike) out.params = cost.params();
  out.precision_bits = bits;
  if (g < ldexp(b.radius, -bits + 4)) {
    out.flags.set(Flag::unresolved);
    out.value = 0.0;
    out.log_value = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = to_double(g);
  out.log_value = to_double(log(g));
  return out;
}

}  // namespace detail

/// E'_1 - E'_0 of H(s). With `adaptive`, unresolved gaps are retried up the precision ladder.
inline GapEstimate gap(const CostModel& cost, double s, int precision_bits = kDoubleBits, bool adaptive = true) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("s must lie in [0, 1]");
  int bits = precision_bits;
  for (;;) {
    const int backend = backend_bits(bits);
    GapEstimate g = with_precision(backend, [&]<class Real>() { return detail::gap_at<Real>(cost, s, bits); });
    if (g.resolved() || !adaptive) return g;
    const int next = next_precision(backend);
    if (next == 0) return g;
    bits = next;
  }
}

struct SGrid {
  double start = 0.0;
  double stop = 1.0;
  int count = 101;

  std::vector<double> points() const {
    if (count < 2) return {start};
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = start + (stop - start) * i / (count - 1);
    return out;
  }
};

struct MinGapResult {
  double s_min = 0.0;
  GapEstimate gap;
  Flags flags;
  std::vector<GapEstimate> curve;  // coarse grid values
};

/// Coarse scan of the gap over s followed by Brent refinement to width refine_tol.
inline MinGapResult min_gap_scan(const CostModel& cost, const SGrid& grid, double refine_tol = 1e-6,
                                 int precision_bits = kDoubleBits) {
  const auto s_values = grid.points();
  if (s_values.size() < 3) throw DomainError("min_gap_scan needs at least three grid points");
  MinGapResult out;
  out.curve.reserve(s_values.size());
  for (double s : s_values) out.curve.push_back(gap(cost, s, precision_bits));

  auto key = [](const GapEstimate& g) { return g.resolved() ? g.value : 0.0; };
  std::size_t best = 0;
  double gmin = key(out.curve[0]), gmax = gmin;
  for (std::size_t i = 1; i < out.curve.size(); ++i) {
    const double v = key(out.curve[i]);
    if (v < gmin) {
      gmin = v;
      best = i;
    }
    gmax = std::max(gmax, v);
  }
  if (gmax - gmin <= 1e-9 * std::max(1.0, gmax)) {
    out.flags.set(Flag::flat);
    out.s_min = s_values[best];
    out.gap = out.curve[best];
    out.gap.flags.merge(out.flags);
    return out;
  }
  if (best == 0 || best + 1 == s_values.size()) {
    out.flags.set(Flag::edge_minimum);
    out.s_min = s_values[best];
    out.gap = out.curve[best];
    out.gap.flags.merge(out.flags);
    return out;
  }

  const double a = s_values[best - 1], b = s_values[best + 1];
  auto f = [&](double s) { return key(gap(cost, s, precision_bits)); };
  const int bits = std::clamp(static_cast<int>(std::ceil(1.0 - std::log2(refine_tol))), 8, 50);
  const auto m = minimize(f, a, b, bits);

  // unimodality probe: values must fall towards the refined minimum from both sides
  bool unimodal = m.f <= gmin;
  constexpr int kProbe = 8;
  double prev = key(out.curve[best - 1]);
  for (int i = 1; i <= kProbe && unimodal; ++i) {
    const double s = a + (m.x - a) * i / (kProbe + 1);
    const double v = f(s);
    if (v > prev * (1 + 1e-12)) unimodal = false;
    prev = v;
  }
  prev = key(out.curve[best + 1]);
  for (int i = 1; i <= kProbe && unimodal; ++i) {
    const double s = b - (b - m.x) * i / (kProbe + 1);
    const double v = f(s);
    if (v > prev * (1 + 1e-12)) unimodal = false;
    prev = v;
  }
  if (!unimodal) {
    out.flags.set(Flag::multimodal);
    out.s_min = s_values[best];
    out.gap = out.curve[best];
    out.gap.flags.merge(out.flags);
    return out;
  }
  out.s_min = m.x;
  out.gap = gap(cost, m.x, precision_bits);
  return out;
}

}  // namespace spikegap
