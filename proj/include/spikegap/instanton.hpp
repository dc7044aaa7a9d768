#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spikegap/errors.hpp"
#include "spikegap/model.hpp"
#include "spikegap/numeric.hpp"
#include "spikegap/parallel.hpp"
#include "spikegap/scaling.hpp"

namespace spikegap {

namespace detail {

inline double log_binomial_pmf(int n, int k, double log_u, double log_1mu) {
  return log_binomial(n, k) + k * log_u + (n - k) * log_1mu;
}

/// P(lo <= k <= hi) for k ~ Bin(n, u), summed in the log domain.
inline double binomial_window(int n, int lo, int hi, double u) {
  if (u <= 0.0) return lo <= 0 && 0 <= hi ? 1.0 : 0.0;
  if (u >= 1.0) return lo <= n && n <= hi ? 1.0 : 0.0;
  const double lu = std::log(u), lv = std::log1p(-u);
  std::vector<double> terms;
  terms.reserve(hi - lo + 1);
  for (int k = std::max(lo, 0); k <= std::min(hi, n); ++k) terms.push_back(log_binomial_pmf(n, k, lu, lv));
  if (terms.empty()) return 0.0;
  return std::exp(logsumexp(terms));
}

/// E h(k) for k ~ Bin(n, u), truncated to 12 standard deviations (+10 sites) around nu.
inline double binomial_mean_of(const CostModel& cost, double u) {
  const int n = cost.n();
  if (u <= 0.0) return cost.h(0);
  if (u >= 1.0) return cost.h(n);
  const double sigma = std::sqrt(n * u * (1.0 - u));
  const int lo = std::max(0, static_cast<int>(std::floor(n * u - 12.0 * sigma - 10.0)));
  const int hi = std::min(n, static_cast<int>(std::ceil(n * u + 12.0 * sigma + 10.0)));
  const double lu = std::log(u), lv = std::log1p(-u);
  double acc = 0.0;
  for (int k = lo; k <= hi; ++k) acc += std::exp(log_binomial_pmf(n, k, lu, lv)) * cost.h(k);
  return acc;
}

}  // namespace detail

/// U(theta, s) = (n/2) C_n (1-s)(1 - sin theta) + s E[h], the coherent-state energy at phi = 0.
struct CoherentPotential {
  CostModel cost;
  double s = 0.0;

  /// E h(k) over Bin(n, sin^2(theta/2)).
  double classical(double theta) const {
    const double sh = std::sin(0.5 * theta);
    const double u = sh * sh;
    if (cost.kind() == CostKind::spike) {
      double w = cost.n() * u;
      if (cost.spike_on()) {
        const auto [lo, hi] = cost.window();
        w += cost.params().height() * detail::binomial_window(cost.n(), lo, hi, u);
      }
      return w;
    }
    return detail::binomial_mean_of(cost, u);
  }

  double driver_scale() const { return 0.5 * cost.n() * cost.driver() * (1.0 - s); }

  double operator()(double theta) const {
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw DomainError("theta must lie in [0, pi]");
    return driver_scale() * (1.0 - std::sin(theta)) + s * classical(theta);
  }

  /// E(theta, phi, s) for complex phi; phi = i phi_I is the tunnelling continuation.
  std::complex<double> energy(double theta, std::complex<double> phi) const {
    return driver_scale() * (1.0 - std::sin(theta) * std::cos(phi)) + s * classical(theta);
  }
};

inline double potential(const CostModel& cost, double s, double theta) { return CoherentPotential{cost, s}(theta); }

struct LocalMinimum {
  double theta = 0.0;
  double value = 0.0;
};

/// All interior local minima of U(., s) on a uniform theta grid, each refined by Brent.
inline std::vector<LocalMinimum> local_minima(const CostModel& cost, double s) {
  const CoherentPotential u{cost, s};
  const int m = std::max(4000, static_cast<int>(60.0 * std::sqrt(static_cast<double>(cost.n()))));
  const double h = std::numbers::pi / m;
  std::vector<double> v(m + 1);
  for (int i = 0; i <= m; ++i) v[i] = u(std::min(i * h, std::numbers::pi));
  std::vector<LocalMinimum> out;
  for (int i = 1; i < m; ++i) {
    if (!(v[i] < v[i - 1] && v[i] <= v[i + 1])) continue;
    const auto r = minimize(u, (i - 1) * h, (i + 1) * h, 30);
    out.push_back(r.f <= v[i] ? LocalMinimum{r.x, r.f} : LocalMinimum{i * h, v[i]});
  }
  return out;
}

struct DoubleWell {
  double s = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  int minima = 0;
};

/// Outermost pair of minima at a fixed s, without any degeneracy adjustment.
inline std::optional<DoubleWell> double_well_at(const CostModel& cost, double s) {
  const auto mins = local_minima(cost, s);
  if (mins.size() < 2) return std::nullopt;
  return DoubleWell{s, mins.front().theta, mins.back().theta, mins.front().value, mins.back().value,
                    static_cast<int>(mins.size())};
}

/// Moves s from s_hint until the outermost minima of U are degenerate.
inline DoubleWell find_degenerate_minima(const CostModel& cost, double s_hint) {
  if (!(s_hint > 0.0 && s_hint < 1.0)) throw DomainError("s_hint must lie in (0, 1)");
  auto diff = [&](double s) -> std::optional<double> {
    const auto w = double_well_at(cost, s);
    if (!w) return std::nullopt;
    return w->u2 - w->u1;
  };
  struct Probe {
    double s;
    double d;
  };
  constexpr double kStep = 0.0025;
  constexpr int kSteps = 120;
  std::optional<Probe> side[2];
  if (auto d = diff(s_hint)) side[0] = side[1] = Probe{s_hint, *d};
  std::optional<std::pair<Probe, Probe>> bracket;
  for (int k = 1; k <= kSteps && !bracket; ++k) {
    for (int dir = 0; dir < 2 && !bracket; ++dir) {
      const double s = s_hint + (dir == 0 ? k : -k) * kStep;
      if (!(s > 0.0 && s < 1.0)) continue;
      const auto d = diff(s);
      if (!d) continue;
      const Probe p{s, *d};
      if (side[dir] && (side[dir]->d > 0) != (p.d > 0)) bracket = std::pair{*side[dir], p};
      side[dir] = p;
    }
  }
  if (!bracket) {
    if (!side[0] && !side[1]) throw NoDoubleWellError("U has fewer than two minima at every probed s");
    throw NoDoubleWellError("the outer minima of U never become degenerate in the probed s range");
  }
  auto [a, b] = *bracket;
  if (a.s > b.s) std::swap(a, b);
  const double tol = 1e-9 * cost.n() * cost.driver();  // energies scale with n C_n
  auto f = [&](double s) {
    const auto d = diff(s);
    if (!d) throw NoDoubleWellError("double well lost inside the degeneracy bracket");
    return *d;
  };
  double s_deg = a.d == 0.0 ? a.s : find_root(f, a.s, b.s, a.d, b.d, 1e-15);
  auto w = double_well_at(cost, s_deg);
  if (!w) throw NoDoubleWellError("double well lost at the degeneracy point");
  if (std::abs(w->u2 - w->u1) > tol)
    throw NumericalError("minima mismatch " + std::to_string(std::abs(w->u2 - w->u1)) + " after root finding");
  return *w;
}

enum class Applicability { ok, region_I, region_II };

inline const char* to_string(Applicability a) {
  switch (a) {
    case Applicability::ok:
      return "ok";
    case Applicability::region_I:
      return "region_I";
    default:
      return "region_II";
  }
}

struct InstantonResult {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double s_star_used = 0.0;
  double S_I = std::numeric_limits<double>::quiet_NaN();
  double quadrature_error = 0.0;
  Applicability applicability = Applicability::ok;
  Flags flags;
};

/// (n/2) int_{theta1}^{theta2} acosh(1 + (U - U1)/(scale sin)) sin dtheta for any potential U.
/// `tol` is the dip below U1 tolerated inside the interval before the formula is declared
/// inapplicable.
template <class Potential>
InstantonResult action_of(const Potential& u, double j, double scale, const DoubleWell& well, double tol,
                          double rel_tol = 1e-10) {
  InstantonResult out;
  out.theta1 = well.theta1;
  out.theta2 = well.theta2;
  out.s_star_used = well.s;
  constexpr int kScan = 2000;
  for (int i = 1; i < kScan; ++i) {
    const double t = well.theta1 + (well.theta2 - well.theta1) * i / kScan;
    if (u(t) - well.u1 < -tol) {
      out.applicability = Applicability::region_II;
      out.flags.set(Flag::region_ii);
      return out;
    }
  }
  auto integrand = [&](double t) {
    const double st = std::sin(t);
    const double du = std::max(u(t) - well.u1, 0.0);
    return acosh1p(du / (scale * st)) * st;
  };
  const auto r = integrate_endpoints(integrand, well.theta1, well.theta2, rel_tol);
  out.S_I = j * r.value;
  out.quadrature_error = j * r.error;
  return out;
}

/// Instanton action between the minima of `well`, with J = n/2 and the driver scale J C_n (1-s).
inline InstantonResult action(const CostModel& cost, const DoubleWell& well, double rel_tol = 1e-10) {
  const double j = 0.5 * cost.n();
  return action_of(CoherentPotential{cost, well.s}, j, j * cost.driver() * (1.0 - well.s), well,
                   1e-9 * cost.n() * cost.driver(), rel_tol);
}

/// phi_I(theta) along the implied instanton: cosh phi_I = 1 + dU/(J C_n (1-s) sin theta).
inline double instanton_momentum(const CostModel& cost, const DoubleWell& well, double theta) {
  const CoherentPotential u{cost, well.s};
  const double scale = 0.5 * cost.n() * cost.driver() * (1.0 - well.s);
  return acosh1p(std::max(u(theta) - well.u1, 0.0) / (scale * std::sin(theta)));
}

/// Largest |residue| (log units) of the log S_I fit still read as a power law.
inline constexpr double kRegionIResidue = 0.1;

struct ActionSweep {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<int> n;
  std::vector<InstantonResult> results;  // one per n, in order
  std::vector<int> excluded;
  std::vector<std::string> reasons;  // parallel to excluded
  std::optional<ScalingFit> fit;
  Applicability applicability = Applicability::ok;
  Flags flags;
};

/// S_I over n at the degeneracy point of each size, then the log-log fit. Sizes without a
/// usable double well are excluded. The sweep is marked region I when the fit residues exceed
/// kRegionIResidue or the classifier cannot read the curvature through the scatter. A small
/// concave residue on its own is normal here.
inline ActionSweep action_scaling_sweep(double alpha, double beta, const std::vector<int>& n_list,
                                        std::optional<double> s_fixed = std::nullopt,
                                        unsigned threads = default_threads()) {
  struct Cell {
    InstantonResult r;
    std::string error;
  };
  auto cells = parallel_map(
      n_list.size(),
      [&](std::size_t i) {
        Cell c;
        try {
          const auto cost = CostModel::spike(SpikeParams::with_width(n_list[i], alpha, beta));
          DoubleWell w;
          if (s_fixed) {
            auto found = double_well_at(cost, *s_fixed);
            if (!found) throw NoDoubleWellError("U has fewer than two minima at the fixed s");
            w = *found;
          } else {
            w = find_degenerate_minima(cost, critical_point());
          }
          c.r = action(cost, w);
          if (c.r.applicability == Applicability::region_II) c.error = "region II";
        } catch (const NoDoubleWellError& e) {
          c.r.flags.set(Flag::not_applicable);
          c.error = std::string("no double well: ") + e.what();
        } catch (const NumericalError& e) {
          c.r.flags.set(Flag::failed);
          c.error = e.what();
        }
        return c;
      },
      threads);
  ActionSweep out;
  out.alpha = alpha;
  out.beta = beta;
  std::vector<double> ns, ys;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    out.n.push_back(n_list[i]);
    out.results.push_back(cells[i].r);
    out.flags.merge(cells[i].r.flags);
    if (cells[i].error.empty() && cells[i].r.S_I > 0.0) {
      ns.push_back(n_list[i]);
      ys.push_back(cells[i].r.S_I);
    } else {
      out.excluded.push_back(n_list[i]);
      out.reasons.push_back(cells[i].error.empty() ? "zero action" : cells[i].error);
      out.flags.set(Flag::excluded);
    }
  }
  if (ns.size() >= 4) {
    out.fit = fit(ns, ys);
    double worst = 0.0;
    for (double r : out.fit->residues) worst = std::max(worst, std::abs(r));
    if (worst > kRegionIResidue || out.fit->verdict == Verdict::inconclusive) {
      out.applicability = Applicability::region_I;
      out.flags.set(Flag::region_i);
    }
  } else {
    out.flags.set(Flag::failed);
  }
  return out;
}

}  // namespace spikegap
