#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spikegap/instanton.hpp"

using namespace spikegap;

namespace {

constexpr double kPi = std::numbers::pi;

// direct binomial probability of the window, no log-domain tricks (fine at small n)
double window_probability(int n, int lo, int hi, double u) {
  double acc = 0.0;
  for (int k = lo; k <= hi; ++k)
    acc += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * std::pow(u, k) *
           std::pow(1 - u, n - k);
  return acc;
}

CostModel symmetric_double_well(int n) {
  std::vector<double> t(n + 1);
  for (int k = 0; k <= n; ++k) t[k] = 8.0 * k * (n - k) / n;
  return CostModel::custom(t);
}

// three wells, the middle one deepest
CostModel symmetric_triple_well(int n) {
  std::vector<double> t(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double x = (k - n / 2.0) / (n / 2.0);
    t[k] = -n * std::cos(3 * kPi * x) - n * (1 - x * x);
  }
  return CostModel::custom(t);
}

}  // namespace

TEST(Potential, EquatorKillsDriver) {
  for (double s : {0.1, 0.5, 0.9}) {
    const auto p = SpikeParams::with_width(64, 0.7, 0.4);
    const auto [lo, hi] = p.window();
    const double expect = s * (32.0 + p.height() * window_probability(64, lo, hi, 0.5));
    EXPECT_NEAR(potential(CostModel::spike(p), s, kPi / 2), expect, 1e-12 * expect);
  }
}

TEST(Potential, NorthPoleIsDriverOnly) {
  const auto cost = CostModel::spike(SpikeParams::with_width(400, 1.0, 0.5));
  for (double s : {0.0, 0.3, 0.8}) EXPECT_NEAR(potential(cost, s, 0.0), 200.0 * (1 - s), 1e-12);
  const auto cubic = CostModel::cubic(40, 3.0);
  EXPECT_NEAR(potential(cubic, 0.3, 0.0), 20.0 * 800.0 * 0.7, 1e-9);
}

TEST(Potential, CubicMatchesContinuumForm) {
  const int n = 60;
  const auto cost = CostModel::cubic(n, 3.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> th(0.0, kPi), ss(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double t = th(rng), s = ss(rng);
    const double u = 0.5 * (1 - std::cos(t));
    const double v = 2 * (1 - s) * (1 - std::sin(t)) + s * cubic_g(3.0, u);
    EXPECT_NEAR(potential(cost, s, t) / std::pow(n / 2.0, 3), v, 1e-11) << t << " " << s;
  }
}

TEST(Potential, WideSpikeWindowInLogDomain) {
  // large n: direct pow() products underflow, log-domain sum must not
  const auto p = SpikeParams::with_width(20000, 0.5, 0.4);
  const auto cost = CostModel::spike(p);
  const double u = potential(cost, 0.4, kPi / 3);
  EXPECT_TRUE(std::isfinite(u));
  const double base = 0.6 * 10000 * (1 - std::sin(kPi / 3)) + 0.4 * 20000 * 0.25;
  EXPECT_GT(u, base);
  EXPECT_LT(u, base + 0.4 * p.height());
}

TEST(Potential, SpikelessMinimumAtEquatorForDriver) {
  const auto m = local_minima(CostModel::spikeless(100), 0.0);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0].theta, kPi / 2, 1e-6);
}

TEST(Potential, ComplexEnergyReducesToPotential) {
  const CoherentPotential u{CostModel::spike(SpikeParams::with_width(256, 1.0, 0.5)), 0.37};
  for (double t : {0.3, 1.0, 2.0}) {
    const auto e = u.energy(t, 0.0);
    EXPECT_NEAR(e.real(), u(t), 1e-12);
    EXPECT_EQ(e.imag(), 0.0);
  }
}

TEST(DegenerateMinima, SpikeNearCriticalPoint) {
  const auto cost = CostModel::spike(SpikeParams::with_width(1000, 1.0, 0.5));
  const auto w = find_degenerate_minima(cost, critical_point());
  EXPECT_NEAR(w.s, critical_point(), 0.01);
  EXPECT_LT(w.theta1, kPi / 3);
  EXPECT_GT(w.theta2, kPi / 3);
  EXPECT_LE(std::abs(w.u1 - w.u2), 1e-9 * 1000);

  // independent scan at 1e-4 resolution
  const CoherentPotential u{cost, w.s};
  std::vector<double> mins;
  double prev2 = u(0.0), prev = u(1e-4);
  for (int i = 2; i * 1e-4 <= kPi; ++i) {
    const double cur = u(i * 1e-4);
    if (prev < prev2 && prev <= cur) mins.push_back((i - 1) * 1e-4);
    prev2 = prev;
    prev = cur;
  }
  ASSERT_EQ(mins.size(), 2u);
  EXPECT_NEAR(mins[0], w.theta1, 2e-4);
  EXPECT_NEAR(mins[1], w.theta2, 2e-4);
}

TEST(DegenerateMinima, SymmetricWell) {
  const auto cost = symmetric_double_well(40);
  const auto w = find_degenerate_minima(cost, 0.7);
  EXPECT_NEAR(w.theta2, kPi - w.theta1, 1e-6);
  EXPECT_LT(w.theta1, kPi / 2);
}

TEST(DegenerateMinima, NoDoubleWell) {
  EXPECT_THROW(find_degenerate_minima(CostModel::spikeless(400), critical_point()), NoDoubleWellError);
  EXPECT_THROW(find_degenerate_minima(CostModel::spike(SpikeParams::with_width(400, 0.0, 0.0)), critical_point()),
               NoDoubleWellError);
  EXPECT_THROW(find_degenerate_minima(CostModel::spikeless(40), 1.0), DomainError);
}

TEST(Action, FlatBarrierIsZero) {
  const DoubleWell w{0.4, 0.5, 2.0, 3.0, 3.0, 2};
  auto flat = [](double) { return 3.0; };
  const auto r = action_of(flat, 50.0, 30.0, w, 1e-9);
  EXPECT_EQ(r.applicability, Applicability::ok);
  EXPECT_EQ(r.S_I, 0.0);
}

TEST(Action, SpikeIsPositiveAndConverged) {
  const auto cost = CostModel::spike(SpikeParams::with_width(1000, 1.0, 0.5));
  const auto w = find_degenerate_minima(cost, critical_point());
  const auto a = action(cost, w, 1e-10);
  const auto b = action(cost, w, 5e-11);
  ASSERT_EQ(a.applicability, Applicability::ok);
  EXPECT_GT(a.S_I, 0.0);
  EXPECT_TRUE(std::isfinite(a.S_I));
  EXPECT_LT(std::abs(a.S_I - b.S_I), 1e-6 * a.S_I);
}

TEST(Action, IntegrandNonNegative) {
  const auto cost = CostModel::spike(SpikeParams::with_width(2000, 0.8, 0.4));
  const auto w = find_degenerate_minima(cost, critical_point());
  const CoherentPotential u{cost, w.s};
  for (int i = 0; i <= 200; ++i) {
    const double t = w.theta1 + (w.theta2 - w.theta1) * i / 200;
    EXPECT_GE(u(t) - w.u1, -1e-9 * 2000) << t;
    EXPECT_GE(instanton_momentum(cost, w, t), 0.0);
  }
}

TEST(Action, EnergyConservedAlongInstanton) {
  const auto cost = CostModel::spike(SpikeParams::with_width(1000, 1.0, 0.5));
  const auto w = find_degenerate_minima(cost, critical_point());
  const CoherentPotential u{cost, w.s};
  for (int i = 1; i <= 100; ++i) {
    const double t = w.theta1 + (w.theta2 - w.theta1) * i / 101;
    const double phi = instanton_momentum(cost, w, t);
    const auto e = u.energy(t, std::complex<double>(0.0, phi));
    EXPECT_NEAR(e.real(), w.u1, 1e-8 * std::abs(w.u1)) << t;
    EXPECT_NEAR(e.imag(), 0.0, 1e-12);
  }
}

TEST(Action, DeeperInnerWellIsRegionTwo) {
  const auto cost = symmetric_triple_well(100);
  const auto w = double_well_at(cost, 0.7);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->minima, 3);
  const auto r = action(cost, *w);
  EXPECT_EQ(r.applicability, Applicability::region_II);
  EXPECT_TRUE(r.flags.has(Flag::region_ii));
  EXPECT_TRUE(std::isnan(r.S_I));
}

TEST(Action, CubicActionIsLinearInN) {
  std::vector<double> per_n;
  double s_deg = 0.0;
  for (int n : {200, 400, 800}) {
    const auto cost = CostModel::cubic(n, 3.0);
    const auto w = find_degenerate_minima(cost, 0.5);
    if (s_deg == 0.0) s_deg = w.s;
    EXPECT_NEAR(w.s, s_deg, 1e-6);
    const auto r = action(cost, w);
    ASSERT_EQ(r.applicability, Applicability::ok);
    per_n.push_back(r.S_I / n);
  }
  EXPECT_GT(per_n[0], 0.0);
  for (double v : per_n) EXPECT_NEAR(v / per_n[0], 1.0, 1e-3);
}

TEST(Sweep, WideTallSpikeIsPowerLike) {
  const auto sw = action_scaling_sweep(1.0, 0.5, geometric_grid(1000, 8000, 5));
  ASSERT_TRUE(sw.fit.has_value());
  EXPECT_TRUE(sw.excluded.empty());
  EXPECT_EQ(sw.applicability, Applicability::ok);
  EXPECT_NEAR(sw.fit->slope, 0.5, 0.1);
  for (double r : sw.fit->residues) EXPECT_LT(std::abs(r), 0.05);
}

TEST(Sweep, NarrowSpikeIsRegionOne) {
  const auto sw = action_scaling_sweep(0.5, 0.2, geometric_grid(1000, 32000, 8));
  ASSERT_TRUE(sw.fit.has_value());
  EXPECT_NE(sw.fit->verdict, Verdict::power_law);
  EXPECT_EQ(sw.applicability, Applicability::region_I);
  EXPECT_TRUE(sw.flags.has(Flag::region_i));
}

TEST(Sweep, SpikelessAbortsCleanly) {
  const auto sw = action_scaling_sweep(0.0, 0.0, {400, 800, 1600, 3200});
  EXPECT_FALSE(sw.fit.has_value());
  EXPECT_EQ(sw.excluded.size(), 4u);
  EXPECT_TRUE(sw.flags.has(Flag::failed));
  for (const auto& r : sw.reasons) EXPECT_NE(r.find("no double well"), std::string::npos);
}

TEST(Sweep, FixedSIsAvailable) {
  const auto sw = action_scaling_sweep(1.0, 0.5, {1000, 1400, 2000, 2800}, critical_point());
  for (const auto& r : sw.results) EXPECT_DOUBLE_EQ(r.s_star_used, critical_point());
}
