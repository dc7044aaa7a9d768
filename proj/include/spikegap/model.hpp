#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spikegap/errors.hpp"

namespace spikegap {

/// Spike instance: height 3/4 n^alpha, width n^beta centred on n/4. No beta means width one.
struct SpikeParams {
  int n = 4;
  double alpha = 0.0;
  std::optional<double> beta;

  static SpikeParams width_one(int n, double alpha) { return {n, alpha, std::nullopt}; }
  static SpikeParams with_width(int n, double alpha, double beta) { return {n, alpha, beta}; }

  bool is_width_one() const { return !beta.has_value(); }

  double height() const { return 0.75 * std::pow(static_cast<double>(n), alpha); }

  /// Inclusive index range of the spike region.
  std::pair<int, int> window() const {
    if (n <= 0 || n % 4 != 0) throw DomainError("n must be a positive multiple of 4, got " + std::to_string(n));
    if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
    const int centre = n / 4;
    if (!beta) return {centre, centre};
    if (!(*beta >= 0.0)) throw DomainError("beta must be >= 0");
    // strict inequalities on both sides
    const double half = 0.5 * std::pow(static_cast<double>(n), *beta);
    const int lo = static_cast<int>(std::floor(centre - half)) + 1;
    const int hi = static_cast<int>(std::ceil(centre + half)) - 1;
    if (lo < 0 || hi > n) throw DomainError("spike region does not fit in [0, n]");
    return {lo, hi};
  }

  bool in_spike(int k) const {
    const auto [lo, hi] = window();
    return lo <= k && k <= hi;
  }

  void validate() const { (void)window(); }

  std::string describe() const {
    char buf[96];
    if (beta)
      std::snprintf(buf, sizeof buf, "n=%d alpha=%.17g beta=%.17g", n, alpha, *beta);
    else
      std::snprintf(buf, sizeof buf, "n=%d alpha=%.17g width-one", n, alpha);
    return buf;
  }
};

inline double cost(const SpikeParams& params, int w) {
  if (w < 0 || w > params.n)
    throw DomainError("w=" + std::to_string(w) + " outside [0, " + std::to_string(params.n) + "]");
  return params.in_spike(w) ? w + params.height() : static_cast<double>(w);
}

enum class CostKind { spike, cubic, custom };

/// Diagonal cost h(w) together with the driver coefficient C_n.
class CostModel {
 public:
  static CostModel spike(const SpikeParams& p) {
    p.validate();
    CostModel m;
    m.kind_ = CostKind::spike;
    m.n_ = p.n;
    m.params_ = p;
    return m;
  }

  /// Hamming-weight cost with the surplus switched off.
  static CostModel spikeless(int n) {
    CostModel m = spike(SpikeParams::width_one(n, 0.0));
    m.spike_on_ = false;
    return m;
  }

  /// FGG cubic g(u) = 4qu(1-u)^2 + 4u^2(1-u) + 4u^3/3 on the (n/2)^3 scale; C_n = n^2/2.
  static CostModel cubic(int n, double q) {
    if (n < 3) throw DomainError("cubic cost needs n >= 3");
    CostModel m;
    m.kind_ = CostKind::cubic;
    m.n_ = n;
    m.q_ = q;
    m.driver_ = 0.5 * static_cast<double>(n) * n;
    return m;
  }

  static CostModel custom(std::vector<double> table, double driver = 1.0) {
    if (table.size() < 2) throw DomainError("custom cost table needs at least two entries");
    for (double v : table)
      if (!std::isfinite(v)) throw DomainError("custom cost table has a non-finite entry");
    if (!(driver > 0.0)) throw DomainError("driver coefficient must be positive");
    CostModel m;
    m.kind_ = CostKind::custom;
    m.n_ = static_cast<int>(table.size()) - 1;
    m.table_ = std::move(table);
    m.driver_ = driver;
    return m;
  }

  CostKind kind() const { return kind_; }
  int n() const { return n_; }
  double driver() const { return driver_; }
  double q() const { return q_; }
  bool spike_on() const { return kind_ == CostKind::spike && spike_on_; }
  const SpikeParams& params() const { return params_; }
  const std::vector<double>& table() const { return table_; }

  /// Spike window (inclusive); only meaningful for the spike kind.
  std::pair<int, int> window() const { return params_.window(); }

  template <class Real = double>
  Real surplus(int w) const {
    if (!spike_on() || !params_.in_spike(w)) return Real(0);
    using std::pow;
    return Real(3) / 4 * pow(Real(n_), Real(params_.alpha));
  }

  template <class Real = double>
  Real h(int w) const {
    if (w < 0 || w > n_) throw DomainError("w=" + std::to_string(w) + " outside [0, " + std::to_string(n_) + "]");
    switch (kind_) {
      case CostKind::spike:
        return Real(w) + surplus<Real>(w);
      case CostKind::cubic: {
        const Real nn(n_), k(w);
        const Real a1 = 4 * Real(q_), a2 = 4 - 8 * Real(q_), a3 = 4 * Real(q_) - Real(8) / 3;
        const Real m1 = k / nn;
        const Real m2 = k * (k - 1) / (nn * (nn - 1));
        const Real m3 = k * (k - 1) * (k - 2) / (nn * (nn - 1) * (nn - 2));
        const Real half = nn / 2;
        return half * half * half * (a1 * m1 + a2 * m2 + a3 * m3);
      }
      default:
        return Real(table_[w]);
    }
  }

  std::vector<double> values() const {
    std::vector<double> out(n_ + 1);
    for (int w = 0; w <= n_; ++w) out[w] = h(w);
    return out;
  }

  std::string describe() const {
    switch (kind_) {
      case CostKind::spike:
        return spike_on_ ? params_.describe() : "n=" + std::to_string(n_) + " spikeless";
      case CostKind::cubic:
        return "n=" + std::to_string(n_) + " cubic q=" + std::to_string(q_);
      default:
        return "n=" + std::to_string(n_) + " custom";
    }
  }

 private:
  CostKind kind_ = CostKind::spike;
  int n_ = 4;
  double driver_ = 1.0;
  double q_ = 0.0;
  bool spike_on_ = true;
  SpikeParams params_{};
  std::vector<double> table_;
};

/// FGG cubic in the unit-interval variable.
inline double cubic_g(double q, double u) {
  return 4 * q * u * (1 - u) * (1 - u) + 4 * u * u * (1 - u) + 4.0 / 3.0 * u * u * u;
}

inline double critical_point() { return (std::numbers::sqrt3 - 1.0) / 2.0; }

/// s and the equivalent angle theta of the normalised interpolation.
struct AdiabaticPoint {
  double s = 0.0;
  double theta = std::numbers::pi / 2;
  double sin_theta = 1.0;
  double cos_theta = 0.0;
  double norm_factor = 1.0;

  AdiabaticPoint() = default;
  explicit AdiabaticPoint(double s_) : s(s_) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("s must lie in [0, 1]");
    norm_factor = std::hypot(s, 1.0 - s);
    sin_theta = (1.0 - s) / norm_factor;
    cos_theta = s / norm_factor;
    theta = std::atan2(1.0 - s, s);
  }

  static AdiabaticPoint from_theta(double theta) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2)) throw DomainError("theta must lie in [0, pi/2]");
    const double c = std::cos(theta), sn = std::sin(theta);
    return AdiabaticPoint(c / (c + sn));
  }
};

template <class Real>
struct Angles {
  Real sin_theta;
  Real cos_theta;
};

template <class Real>
Angles<Real> angles(double s) {
  using std::sqrt;
  const Real rs(s), one_minus = Real(1) - Real(s);
  const Real norm = sqrt(rs * rs + one_minus * one_minus);
  return {one_minus / norm, rs / norm};
}

/// Symmetric tridiagonal matrix; offdiag[k] couples k-1 and k, offdiag[0] is unused (0).
template <class Real>
struct TridiagonalOperator {
  std::vector<Real> diag;
  std::vector<Real> offdiag;

  TridiagonalOperator() = default;
  TridiagonalOperator(std::vector<Real> d, std::vector<Real> e) : diag(std::move(d)), offdiag(std::move(e)) {
    if (offdiag.size() + 1 == diag.size()) offdiag.insert(offdiag.begin(), Real(0));
    if (offdiag.size() != diag.size() || diag.empty()) throw DomainError("tridiagonal arrays have mismatched sizes");
    offdiag[0] = Real(0);
  }

  std::size_t dim() const { return diag.size(); }

  template <class Other>
  TridiagonalOperator<Other> cast() const {
    TridiagonalOperator<Other> out;
    out.diag.reserve(dim());
    out.offdiag.reserve(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
      out.diag.push_back(static_cast<Other>(diag[k]));
      out.offdiag.push_back(static_cast<Other>(offdiag[k]));
    }
    return out;
  }
};

/// H(s) = -sin(theta) C_n X - cos(theta) Z + cos(theta) H_sp restricted to the |k> basis.
/// Diagonal: cos(theta) (h(k) - n/2). Off-diagonal: -C_n sin(theta)/2 sqrt(k(n+1-k)).
template <class Real = double>
TridiagonalOperator<Real> build_hamiltonian(const CostModel& cost, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("s must lie in [0, 1]");
  using std::sqrt;
  const int n = cost.n();
  const auto [sn, cs] = angles<Real>(s);
  const Real half_n = Real(n) / 2;
  const Real coupling = Real(cost.driver()) * sn / 2;
  TridiagonalOperator<Real> op;
  op.diag.resize(n + 1);
  op.offdiag.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    op.diag[k] = cs * (cost.h<Real>(k) - half_n);
    op.offdiag[k] = k == 0 ? Real(0) : -coupling * sqrt(Real(k) * Real(n + 1 - k));
  }
  return op;
}

template <class Real = double>
TridiagonalOperator<Real> build_hamiltonian(const CostModel& cost, const AdiabaticPoint& point) {
  return build_hamiltonian<Real>(cost, point.s);
}

}  // namespace spikegap
