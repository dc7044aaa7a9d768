#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spikegap/errors.hpp"
#include "spikegap/model.hpp"
#include "spikegap/numeric.hpp"
#include "spikegap/parallel.hpp"
#include "spikegap/precision.hpp"
#include "spikegap/spectrum.hpp"

namespace spikegap {

enum class Verdict { power_law, superpolynomial, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::power_law:
      return "power_law";
    case Verdict::superpolynomial:
      return "superpolynomial";
    default:
      return "inconclusive";
  }
}

/// Decision boundary on the concavity score. Midpoint between the largest |score| of the
/// synthetic power laws and the smallest |score| of the stretched exponentials, see
/// calibrate_classifier(); the unit tests recompute it.
inline constexpr double kConcavityThreshold = 1.8909e-3;

struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (log n, log y), input order
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residues;  // input order
  double concavity_score = 0.0;  // d^2 residue / d (log n)^2 of the best parabola
  double noise = 0.0;            // rms of residues about their own quadratic fit
  Verdict verdict = Verdict::inconclusive;
};

namespace detail {

struct QuadraticFit {
  double curvature = 0.0;  // second derivative of the fitted parabola
  double misfit = 0.0;     // rms of the data about it
};

/// Least-squares parabola through (x, r).
inline QuadraticFit quadratic_fit(const std::vector<double>& x, const std::vector<double>& r) {
  const std::size_t m = x.size();
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / m;
  double s[5] = {0, 0, 0, 0, 0}, t[3] = {0, 0, 0};
  for (std::size_t i = 0; i < m; ++i) {
    const double u = x[i] - xm;
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += p;
      if (k < 3) t[k] += p * r[i];
      p *= u;
    }
  }
  // normal equations, 3x3 by Cramer
  const double a[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  auto det3 = [](const double q[3][3]) {
    return q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
           q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  };
  const double d = det3(a);
  if (d == 0.0) return {};
  double c[3];
  for (int col = 0; col < 3; ++col) {
    double b[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b[i][j] = j == col ? t[i] : a[i][j];
    c[col] = det3(b) / d;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = x[i] - xm;
    const double e = r[i] - (c[0] + c[1] * u + c[2] * u * u);
    ss += e * e;
  }
  return {2.0 * c[2], std::sqrt(ss / m)};
}

}  // namespace detail

/// OLS fit on (log n, log y) pairs plus the residue-concavity verdict.
inline ScalingFit fit_log(std::vector<std::pair<double, double>> points, double threshold = kConcavityThreshold) {
  if (points.size() < 4) throw DomainError("scaling fit needs at least 4 points");
  ScalingFit out;
  std::vector<double> x, y;
  for (const auto& [a, b] : points) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("scaling fit point is not finite");
    x.push_back(a);
    y.push_back(b);
  }
  const auto line = least_squares(x, y);
  out.slope = line.slope;
  out.intercept = line.intercept;
  out.residues.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.residues[i] = y[i] - (line.slope * x[i] + line.intercept);

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return x[i] < x[j]; });
  std::vector<double> xs, rs;
  for (auto i : order) {
    xs.push_back(x[i]);
    rs.push_back(out.residues[i]);
  }
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw DomainError("scaling fit needs distinct n values");

  // mean second derivative of the residues in log n, as the curvature of their least-squares
  // parabola; a raw second-difference average telescopes onto the two end slopes
  const auto q = detail::quadratic_fit(xs, rs);
  out.concavity_score = q.curvature;
  out.noise = q.misfit;

  const double span = xs.back() - xs.front();
  const double sagitta = std::abs(out.concavity_score) * span * span / 8.0;
  if (std::abs(out.concavity_score) <= threshold)
    out.verdict = Verdict::power_law;
  else if (out.noise > sagitta)
    out.verdict = Verdict::inconclusive;  // curvature not distinguishable from scatter
  else if (out.concavity_score < 0.0)
    out.verdict = Verdict::superpolynomial;
  else
    out.verdict = Verdict::inconclusive;
  out.points = std::move(points);
  return out;
}

inline ScalingFit fit(const std::vector<double>& n, const std::vector<double>& y,
                      double threshold = kConcavityThreshold) {
  if (n.size() != y.size()) throw DomainError("n and y differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) throw DomainError("n must be positive");
    if (!(y[i] > 0.0)) throw DomainError("y must be positive for a log-log fit");
    pts.emplace_back(std::log(n[i]), std::log(y[i]));
  }
  return fit_log(std::move(pts), threshold);
}

/// Real-valued geometric grid.
inline std::vector<double> geometric_points(double start, double stop, int count) {
  if (!(start > 0.0) || !(stop > start) || count < 2) throw ConfigError("bad geometric grid");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = start * std::pow(stop / start, static_cast<double>(i) / (count - 1));
  return out;
}

/// Geometric grid rounded to multiples of `multiple`, duplicates dropped.
inline std::vector<int> geometric_grid(double start, double stop, int count, int multiple = 4) {
  std::vector<int> out;
  for (double t : geometric_points(start, stop, count)) {
    const int v = std::max(multiple, static_cast<int>(std::lround(t / multiple)) * multiple);
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  return out;
}

/// Sizes where n^beta/2 is a half-integer (rounded to a multiple of 4), picked nearest in log n to a
/// geometric grid. The number of window sites jumps by two each time n^beta/2 crosses an integer,
/// so the gap is a sawtooth in n; sampling at a fixed phase of the sawtooth keeps the lattice
/// from adding its own jitter to the residues.
inline std::vector<int> lattice_aligned_grid(double start, double stop, int count, double beta) {
  if (!(beta > 0.0)) return geometric_grid(start, stop, count);
  const int m_lo = static_cast<int>(std::ceil(0.5 * std::pow(start, beta) - 0.5));
  const int m_hi = static_cast<int>(std::floor(0.5 * std::pow(stop, beta) - 0.5));
  std::vector<int> candidates;
  for (int m = std::max(m_lo, 0); m <= m_hi; ++m) {
    const int n = static_cast<int>(std::lround(std::pow(2.0 * m + 1.0, 1.0 / beta) / 4.0)) * 4;
    if (n >= 4 && (candidates.empty() || n > candidates.back())) candidates.push_back(n);
  }
  if (candidates.size() < 2) return geometric_grid(start, stop, count);
  std::vector<int> out;
  for (double t : geometric_points(start, stop, count)) {
    int best = candidates.front();
    for (int n : candidates)
      if (std::abs(std::log(n / t)) < std::abs(std::log(best / t))) best = n;
    if (out.empty() || best > out.back()) out.push_back(best);
  }
  return out;
}

struct Calibration {
  double threshold = 0.0;
  std::vector<double> power_scores;
  std::vector<double> stretched_scores;
};

/// Synthetic suite over 500 <= n <= 3e4 (24 geometric points): 20 power laws n^-p, p in [0, 3],
/// and 20 stretched exponentials exp(-n^c), c in [0.05, 0.5].
inline Calibration calibrate_classifier() {
  const auto ns = geometric_points(500.0, 3e4, 24);
  Calibration out;
  for (int i = 0; i < 20; ++i) {
    const double p = 3.0 * i / 19;
    std::vector<double> y;
    for (double n : ns) y.push_back(std::pow(n, -p));
    out.power_scores.push_back(fit(ns, y, 0.0).concavity_score);
  }
  for (int i = 0; i < 20; ++i) {
    const double c = 0.05 + 0.45 * i / 19;
    std::vector<std::pair<double, double>> pts;
    for (double n : ns) pts.emplace_back(std::log(n), -std::pow(n, c));
    out.stretched_scores.push_back(fit_log(pts, 0.0).concavity_score);
  }
  double pmax = 0.0, smin = 1e300;
  for (double v : out.power_scores) pmax = std::max(pmax, std::abs(v));
  for (double v : out.stretched_scores) smin = std::min(smin, std::abs(v));
  out.threshold = 0.5 * (pmax + smin);
  return out;
}

struct SlopePoint {
  double alpha = 0.0;
  std::optional<ScalingFit> fit;
  std::vector<GapEstimate> gaps;  // resolved and unresolved, in n order
  std::vector<int> omitted;
  Flags flags;
};

/// Exact gap at s* of the width-one spike over n_list, fitted against n for each alpha.
inline std::vector<SlopePoint> slope_vs_alpha(const std::vector<double>& alphas, const std::vector<int>& n_list,
                                              int precision_bits = kDoubleBits, unsigned threads = default_threads()) {
  const std::size_t cols = n_list.size();
  auto cells = parallel_map(
      alphas.size() * cols,
      [&](std::size_t idx) {
        const auto p = SpikeParams::width_one(n_list[idx % cols], alphas[idx / cols]);
        return gap(CostModel::spike(p), critical_point(), precision_bits);
      },
      threads);
  std::vector<SlopePoint> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    SlopePoint sp;
    sp.alpha = alphas[a];
    std::vector<double> ns, ys;
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& g = cells[a * cols + j];
      sp.gaps.push_back(g);
      if (g.resolved() && g.value > 0.0) {
        ns.push_back(n_list[j]);
        ys.push_back(g.value);
      } else {
        sp.omitted.push_back(n_list[j]);
        sp.flags.set(Flag::unresolved);
      }
    }
    if (ns.size() >= 4)
      sp.fit = fit(ns, ys);
    else
      sp.flags.set(Flag::failed);
    out.push_back(std::move(sp));
  }
  return out;
}

struct GapClassification {
  std::vector<int> n;
  std::vector<double> s_min;
  std::vector<GapEstimate> gaps;
  std::vector<int> omitted;
  std::optional<ScalingFit> fit;
  Flags flags;
};

/// Minimum gap over s in [0.33, 0.40] for each n (located in double, re-evaluated at
/// precision_bits), then the log-log fit and verdict.
inline GapClassification classify_exact_gaps(double alpha, double beta, const std::vector<int>& n_list,
                                             int precision_bits = kQuadBits, unsigned threads = default_threads(),
                                             double threshold = kConcavityThreshold) {
  struct Cell {
    double s = 0.0;
    GapEstimate g;
  };
  auto cells = parallel_map(
      n_list.size(),
      [&](std::size_t i) {
        const auto cost = CostModel::spike(SpikeParams::with_width(n_list[i], alpha, beta));
        const auto m = min_gap_scan(cost, SGrid{0.33, 0.40, 29}, 1e-9, kDoubleBits);
        Cell c{m.s_min, gap(cost, m.s_min, precision_bits)};
        c.g.flags.merge(m.flags);
        return c;
      },
      threads);
  GapClassification out;
  std::vector<double> ns, ys;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    out.n.push_back(n_list[i]);
    out.s_min.push_back(cells[i].s);
    out.gaps.push_back(cells[i].g);
    out.flags.merge(cells[i].g.flags);
    if (cells[i].g.resolved() && cells[i].g.value > 0.0) {
      ns.push_back(n_list[i]);
      ys.push_back(cells[i].g.value);
    } else {
      out.omitted.push_back(n_list[i]);
    }
  }
  if (ns.size() >= 4)
    out.fit = fit(ns, ys, threshold);
  else
    out.flags.set(Flag::failed);
  return out;
}

}  // namespace spikegap
