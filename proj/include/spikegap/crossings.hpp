#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "spikegap/errors.hpp"
#include "spikegap/model.hpp"
#include "spikegap/numeric.hpp"
#include "spikegap/parallel.hpp"
#include "spikegap/spectrum.hpp"

namespace spikegap {

/// Level t of the spikeless system, amplitudes <k|psi_t> as sign + log magnitude, v_0 > 0.
struct SpikelessEigenstate {
  int n = 0;
  int t = 0;
  double s = 0.0;
  std::vector<SignedLog> amplitudes;
};

namespace detail {

template <class Real>
std::vector<SignedLog> spikeless_vector(int n, int t, double s, int bits) {
  // plain Hamming-weight table: any n, odd ones included
  std::vector<double> weight(n + 1);
  for (int k = 0; k <= n; ++k) weight[k] = k;
  const auto op = build_hamiltonian<Real>(CostModel::custom(std::move(weight)), s);
  return eigenvector(op, Real(-n) / 2 + t, bits).vector;
}

}  // namespace detail

/// By twisted factorisation at the exact level -n/2 + t; stable through the nodes. Amplitudes that
/// vanish at a node come out at round-off size for the working precision.
inline SpikelessEigenstate spikeless_state(int n, int t, double s, int precision_bits = kDoubleBits) {
  if (n < 1) throw DomainError("n must be positive");
  if (t < 0 || t > n) throw DomainError("level t must lie in [0, n]");
  SpikelessEigenstate out{n, t, s, with_precision(backend_bits(precision_bits), [&]<class Real>() {
                            return detail::spikeless_vector<Real>(n, t, s, precision_bits);
                          })};
  if (out.amplitudes.front().sign < 0)
    for (auto& a : out.amplitudes) a.sign = -a.sign;
  return out;
}

namespace detail {

using Wide = boost::multiprecision::cpp_bin_float_100;

inline Wide wide_binomial(int n, int k) { return binomial<Wide>(n, k); }

/// Product-state sum for <k|psi_t^(n)>; zero outside 0 <= k <= n.
inline Wide closed_form_amplitude(int n, int t, int k, const Wide& half_angle) {
  using boost::multiprecision::cos;
  using boost::multiprecision::pow;
  using boost::multiprecision::sqrt;
  using boost::multiprecision::tan;
  if (k < 0 || k > n) return Wide(0);
  const Wide tn = tan(half_angle);
  const Wide cot2 = 1 / (tn * tn);
  Wide sum = 0, term = 1;
  for (int j = 0; j <= t; ++j) {
    sum += term * wide_binomial(t, j) * wide_binomial(n - t, k - j);
    term *= -cot2;
  }
  return sqrt(wide_binomial(n, t) / wide_binomial(n, k)) * pow(tn, t + k) * pow(cos(half_angle), n) * sum;
}

inline Wide wide_half_angle(double s) {
  using boost::multiprecision::atan2;
  return atan2(Wide(1) - Wide(s), Wide(s)) / 2;
}

/// P_{n,k} = sqrt(C(n,k)) sin^k cos^(n-k) of the half angle.
inline Wide product_weight(int n, int k, const Wide& half_angle) {
  using boost::multiprecision::cos;
  using boost::multiprecision::pow;
  using boost::multiprecision::sin;
  using boost::multiprecision::sqrt;
  if (k < 0 || k > n) return Wide(0);
  return sqrt(wide_binomial(n, k)) * pow(sin(half_angle), k) * pow(cos(half_angle), n - k);
}

}  // namespace detail

/// Small-n oracle: the closed-form product-state sum in 100-digit arithmetic.
inline SpikelessEigenstate spikeless_state_closed_form(int n, int t, double s) {
  using boost::multiprecision::abs;
  using boost::multiprecision::log;
  if (t < 0 || t > n) throw DomainError("level t must lie in [0, n]");
  const auto half = detail::wide_half_angle(s);
  SpikelessEigenstate out{n, t, s, std::vector<SignedLog>(n + 1)};
  for (int k = 0; k <= n; ++k) {
    const auto a = detail::closed_form_amplitude(n, t, k, half);
    if (a != 0) out.amplitudes[k] = {a > 0 ? 1 : -1, static_cast<double>(log(abs(a)))};
  }
  return out;
}

/// Relative mismatch of P_{n+1,k} <k|psi_{t+1}^(n+1)> against P_{n,k} <k|psi_t> - P_{n,k-1} <k-1|psi_t>,
/// with the k-independent constant fixed at k = 0.
inline double recurrence_check(int n, int t, int k, double s = critical_point()) {
  using boost::multiprecision::abs;
  if (t < 0 || t >= n) throw DomainError("recurrence needs 0 <= t < n");
  if (k < 0 || k > n + 1) throw DomainError("recurrence needs 0 <= k <= n + 1");
  const auto half = detail::wide_half_angle(s);
  auto lhs = [&](int q) { return detail::product_weight(n + 1, q, half) * detail::closed_form_amplitude(n + 1, t + 1, q, half); };
  auto rhs = [&](int q) {
    return detail::product_weight(n, q, half) * detail::closed_form_amplitude(n, t, q, half) -
           detail::product_weight(n, q - 1, half) * detail::closed_form_amplitude(n, t, q - 1, half);
  };
  const auto c = lhs(0) / rhs(0);
  const auto l = lhs(k), r = c * rhs(k);
  const auto scale = std::max(abs(l), abs(r));
  if (scale == 0) return 0.0;
  return static_cast<double>(abs(l - r) / scale);
}

/// Interpolated positions of the sign changes; a node sits at k - 1 + |a_{k-1}| / (|a_{k-1}| + |a_k|).
inline std::vector<double> node_positions(const std::vector<SignedLog>& a) {
  std::vector<double> out;
  int last_sign = 0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].sign == 0) {
      if (last_sign != 0) {
        out.push_back(static_cast<double>(k));
        last_sign = 0;
      }
      continue;
    }
    if (last_sign != 0 && a[k].sign != last_sign) {
      if (last + 1 == k)
        out.push_back(static_cast<double>(last) + 1.0 / (1.0 + std::exp(a[k].logmag - a[last].logmag)));
      else
        out.push_back(static_cast<double>(k));
    }
    last_sign = a[k].sign;
    last = k;
  }
  return out;
}

inline std::size_t node_count(const SpikelessEigenstate& state) { return node_positions(state.amplitudes).size(); }

/// s at which the i-th node of spikeless level t sits at n/4. Node positions fall as s grows.
inline double node_crossing_s(int n, int t, int i, double lo = 0.01, double hi = 0.99) {
  if (i < 1 || i > t) throw DomainError("node index must lie in [1, t]");
  auto offset = [&](double s) {
    const auto nodes = node_positions(spikeless_state(n, t, s).amplitudes);
    if (static_cast<int>(nodes.size()) < i) throw NumericalError("level lost a node");
    return nodes[i - 1] - 0.25 * n;
  };
  const double flo = offset(lo), fhi = offset(hi);
  if ((flo > 0) == (fhi > 0)) throw NotFoundError("node never reaches n/4 for s in the search range");
  return find_root(offset, lo, hi, flo, fhi, 1e-13);
}

struct CrossingPrediction {
  int t = 1;
  int i = 1;
  double s_t_i = 0.0;
  std::optional<double> verified_gap;
  std::optional<double> s_dip;
  std::optional<double> off_dip_gap;  // smaller of gap_t at s_t_i +- 0.05
  Flags flags;
};

inline CrossingPrediction predict_crossing(int n, int t, int i) { return {t, i, node_crossing_s(n, t, i), {}, {}, {}, {}}; }

/// gap_t = E'_t - E'_{t-1} of H(s).
inline double level_gap(const CostModel& cost, int t, double s) {
  if (t < 1 || t > cost.n()) throw DomainError("gap level t must lie in [1, n]");
  const auto ev = lowest_eigenvalues(build_hamiltonian<double>(cost, s), static_cast<std::size_t>(t) + 1);
  return ev[t] - ev[t - 1];
}

/// Local minimum of gap_t around the predicted s: 41-point grid over +-0.01, Brent on the best cell,
/// bracket doubled (up to 3 times) while the minimum sits on its edge.
inline CrossingPrediction verify_crossing(const CostModel& cost, CrossingPrediction p) {
  constexpr int kGrid = 41;
  constexpr int kWiden = 3;
  auto g = [&](double s) { return level_gap(cost, p.t, std::clamp(s, 0.0, 1.0)); };
  double half = 0.01;
  for (int attempt = 0;; ++attempt) {
    const double lo = std::max(0.0, p.s_t_i - half), hi = std::min(1.0, p.s_t_i + half);
    std::vector<double> vals(kGrid);
    for (int k = 0; k < kGrid; ++k) vals[k] = g(lo + (hi - lo) * k / (kGrid - 1));
    const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    const bool edge = best == 0 || best == kGrid - 1;
    if (edge && attempt < kWiden) {
      half *= 2;
      continue;
    }
    if (edge) {
      p.flags.set(Flag::edge_minimum);
      p.s_dip = lo + (hi - lo) * best / (kGrid - 1);
      p.verified_gap = vals[best];
    } else {
      const double step = (hi - lo) / (kGrid - 1);
      const auto m = minimize(g, lo + step * (best - 1), lo + step * (best + 1), 40);
      p.s_dip = m.x;
      p.verified_gap = std::min(m.f, vals[best]);
    }
    break;
  }
  const double a = p.s_t_i - 0.05, b = p.s_t_i + 0.05;
  std::optional<double> off;
  for (double s : {a, b})
    if (s >= 0.0 && s <= 1.0) off = off ? std::min(*off, g(s)) : g(s);
  p.off_dip_gap = off;
  return p;
}

inline CrossingPrediction verify_crossing(int n, double alpha, CrossingPrediction p) {
  return verify_crossing(CostModel::spike(SpikeParams::width_one(n, alpha)), p);
}

struct OrderingCheck {
  bool holds = true;
  std::vector<double> s_first;  // s_t^1 for t = 1..t_max
  bool decreasing = true;
  bool difference_nodes = true;  // first node of S never after the first node of S'
};

namespace detail {

/// First integer node index of a signed-log sequence (index of the first zero or sign flip), or -1.
inline int first_node_index(const std::vector<SignedLog>& a) {
  int last_sign = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].sign == 0) {
      if (last_sign != 0) return static_cast<int>(k);
      continue;
    }
    if (last_sign != 0 && a[k].sign != last_sign) return static_cast<int>(k);
    last_sign = a[k].sign;
  }
  return -1;
}

/// {P_{n,k} <k|psi_t^(n)>} in sign + log form.
inline std::vector<SignedLog> weighted_sequence(int n, int t, double s) {
  auto st = spikeless_state(n, t, s);
  const AdiabaticPoint pt(s);
  const double ls = std::log(std::sin(pt.theta / 2)), lc = std::log(std::cos(pt.theta / 2));
  for (int k = 0; k <= n; ++k)
    if (st.amplitudes[k].sign != 0) st.amplitudes[k].logmag += 0.5 * log_binomial(n, k) + k * ls + (n - k) * lc;
  return st.amplitudes;
}

}  // namespace detail

/// s_{t+1}^1 < s_t^1 for t < t_max, plus the difference-sequence node argument at each s_t.
inline OrderingCheck ordering_theorem_check(int n, int t_max, unsigned threads = default_threads()) {
  if (t_max < 1) throw DomainError("t_max must be at least 1");
  OrderingCheck out;
  out.s_first = parallel_map(
      static_cast<std::size_t>(t_max), [&](std::size_t i) { return node_crossing_s(n, static_cast<int>(i) + 1, 1); },
      threads);
  for (int t = 1; t < t_max; ++t)
    if (!(out.s_first[t] < out.s_first[t - 1])) out.decreasing = false;
  for (int t = 1; t < t_max; ++t) {
    const double s = out.s_first[t - 1];
    const int node_prev = detail::first_node_index(detail::weighted_sequence(n, t, s));
    const int node_next = detail::first_node_index(detail::weighted_sequence(n + 1, t + 1, s));
    if (node_prev < 0 || node_next < 0 || node_next > node_prev) out.difference_nodes = false;
  }
  out.holds = out.decreasing && out.difference_nodes;
  return out;
}

}  // namespace spikegap
