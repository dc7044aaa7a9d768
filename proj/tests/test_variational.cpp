#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles/dense.hpp"
#include "spikegap/variational.hpp"

using namespace spikegap;

namespace {

std::vector<double> values(const ClosedFormState& st) {
  std::vector<double> out;
  for (const auto& a : st.amplitudes()) out.push_back(a.value());
  return out;
}

// <psi|X|psi> and <psi|Z|psi> with X, Z the total spin components
double expect_x(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) acc += std::sqrt(static_cast<double>(k) * (n + 1 - k)) * v[k - 1] * v[k];
  return acc;
}

double expect_z(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) acc += (0.5 * n - k) * v[k] * v[k];
  return acc;
}

double quadratic_form(const TridiagonalOperator<double>& op, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t k = 0; k < op.dim(); ++k) {
    acc += op.diag[k] * v[k] * v[k];
    if (k > 0) acc += 2.0 * op.offdiag[k] * v[k - 1] * v[k];
  }
  return acc;
}

}  // namespace

TEST(ClosedForm, StatesAreSpikelessEigenvectors) {
  for (int n : {8, 40, 400}) {
    const auto op = build_hamiltonian(CostModel::spikeless(n), critical_point());
    for (auto kind : {StateKind::ground, StateKind::first_excited}) {
      const auto v = values({kind, n});
      double norm = 0.0;
      for (double x : v) norm += x * x;
      EXPECT_NEAR(norm, 1.0, 1e-12);
      const double e = kind == StateKind::ground ? -0.5 * n : -0.5 * n + 1;
      EXPECT_NEAR(quadratic_form(op, v), e, 1e-9 * n);
    }
    EXPECT_EQ(ClosedFormState({StateKind::first_excited, n}).amplitude(n / 4).sign, 0);
  }
}

TEST(ClosedForm, AbsStateKeepsXAndZ) {
  for (int n : {4, 40, 400, 2000}) {
    const auto v1 = values({StateKind::first_excited, n});
    const auto va = values({StateKind::abs_first_excited, n});
    EXPECT_NEAR(expect_x(va), expect_x(v1), 1e-9 * n);
    EXPECT_NEAR(expect_z(va), expect_z(v1), 1e-9 * n);
  }
}

TEST(ClosedForm, DriverExpectations) {
  for (int n : {4, 100, 1000}) {
    const auto v0 = values({StateKind::ground, n});
    const auto v1 = values({StateKind::first_excited, n});
    const double r3 = std::sqrt(3.0) / 2;
    EXPECT_NEAR(r3 * expect_x(v0) + 0.5 * expect_z(v0), 0.5 * n, 1e-9 * n);
    EXPECT_NEAR(r3 * expect_x(v1) + 0.5 * expect_z(v1), 0.5 * n - 1, 1e-9 * n);
  }
}

TEST(ClosedForm, MeanDeviationIdentity) {
  for (int n = 4; n <= 400; n += 4) {
    std::vector<double> terms;
    for (int k = 0; k <= n; ++k) {
      if (4 * k == n) continue;
      terms.push_back(log_binomial(n, k) + k * std::log(0.25) + (n - k) * std::log(0.75) +
                      std::log(std::abs(k - 0.25 * n)));
    }
    const double lhs = logsumexp(terms);
    const double rhs = std::log(3.0 * n / 8) + log_binomial(n, n / 4) + (n / 4) * std::log(0.25) +
                       (3 * n / 4) * std::log(0.75);
    EXPECT_NEAR(lhs, rhs, 1e-11) << n;
  }
}

TEST(Overlap, SmallNClosedForm) {
  EXPECT_NEAR(overlap_abs_ground(4), std::sqrt(3.0) * 27.0 / 64.0, 1e-14);
  EXPECT_THROW(overlap_abs_ground(6), DomainError);
}

TEST(Overlap, MatchesBruteForceSum) {
  for (int n : {4, 100, 1000}) {
    const auto v0 = values({StateKind::ground, n});
    const auto va = values({StateKind::abs_first_excited, n});
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += v0[k] * va[k];
    EXPECT_NEAR(overlap_abs_ground(n), acc, 1e-12);
  }
  EXPECT_NEAR(overlap_abs_ground(1000) / std::sqrt(2 / std::numbers::pi), 1.0, 1e-3);
}

TEST(Overlap, LimitConstant) {
  EXPECT_NEAR(overlap_abs_ground(40000), std::sqrt(2 / std::numbers::pi), 1e-4);
}

TEST(SpikeExpectation, DirectEvaluation) {
  const double direct = 0.75 * 8 * 28 * std::pow(0.25, 2) * std::pow(0.75, 6);
  EXPECT_NEAR(spike_expectation(8, 1.0), direct, 1e-14);
  EXPECT_NEAR(spike_expectation(100, 0.0), 0.75 * std::exp(2 * log_ground_amplitude(100, 25)), 1e-15);
}

TEST(SpikeExpectation, Asymptotic) {
  // <n/4|psi_0>^2 -> sqrt(8/(3 pi)) n^(-1/2); the surplus carries an extra 3/4
  const int n = 10000;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double scale = std::sqrt(8 / (3 * std::numbers::pi)) * std::pow(n, alpha - 0.5);
    EXPECT_NEAR(spike_expectation(n, alpha) / (0.75 * scale), 1.0, 0.01);
  }
}

TEST(RayleighQuotient, Limits) {
  EXPECT_DOUBLE_EQ(rayleigh_quotient(0.0, 100, 1.0), 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(rayleigh_quotient(inf, 100, 1.0), 0.5 * spike_expectation(100, 1.0) - 1.0, 1e-15);
  EXPECT_NEAR(rayleigh_quotient(1e9, 100, 1.0), rayleigh_quotient(inf, 100, 1.0), 1e-8);
}

TEST(RayleighQuotient, MatchesQuadraticForm) {
  const int n = 12;
  const double alpha = 1.0;
  const auto op = build_hamiltonian(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
  const auto v0 = values({StateKind::ground, n});
  const auto va = values({StateKind::abs_first_excited, n});
  for (double x : {std::sqrt(3.0) / 2 * std::pow(n, 0.5 - alpha), 0.3, 2.0}) {
    std::vector<double> psi(n + 1);
    double nrm = 0.0;
    for (int k = 0; k <= n; ++k) {
      psi[k] = va[k] + x * v0[k];
      nrm += psi[k] * psi[k];
    }
    const double brute = quadratic_form(op, psi) / nrm - spikeless_first_excited(n);
    EXPECT_NEAR(rayleigh_quotient(x, n, alpha), brute, 1e-12);
  }
}

TEST(LowerBound, BelowExactGap) {
  for (int n : {8, 12, 100, 500}) {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const auto lb = lower_bound_gap(n, alpha);
      const auto g = gap(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
      EXPECT_LE(lb.estimate.value, g.value + 1e-12) << n << " " << alpha;
      EXPECT_EQ(lb.estimate.method, GapMethod::variational_lower);
    }
  }
}

TEST(LowerBound, ConstantBelowHalf) {
  double prev = 0.0;
  for (int n : {1000, 4000, 16000}) {
    const double v = lower_bound_gap(n, 0.25).estimate.value;
    EXPECT_GT(v, 0.3);
    if (prev > 0) {
      EXPECT_NEAR(v / prev, 1.0, 0.1);
    }
    prev = v;
  }
}

TEST(LowerBound, ScalingAtAlphaOne) {
  // n^(1/2) * bound -> 1.8425 for the best mixing and 1.1229 at the closed-form witness
  const int n = 10000;
  const auto lb = lower_bound_gap(n, 1.0);
  const double c_opt = (2 / std::numbers::pi) / (0.375 * std::sqrt(8 / (3 * std::numbers::pi)));
  const double c_x0 = std::sqrt(6 / std::numbers::pi) - 9.0 / 32 * std::sqrt(8 / (3 * std::numbers::pi));
  EXPECT_NEAR(lb.estimate.value * std::sqrt(n) / c_opt, 1.0, 0.02);
  EXPECT_NEAR(lb.witness_value * std::sqrt(n) / c_x0, 1.0, 0.02);
  EXPECT_GE(lb.estimate.value, lb.witness_value);
}

TEST(LowerBound, AlwaysPositive) {
  // d RQ / dx at x = 0 is -2 <psi_abs|psi_0> < 0, so the family never gives a vacuous bound
  for (int n : {4, 8, 64})
    for (double alpha : {0.0, 1.0, 3.0}) {
      const auto lb = lower_bound_gap(n, alpha);
      EXPECT_GT(lb.estimate.value, 0.0);
      EXPECT_FALSE(lb.estimate.flags.has(Flag::vacuous));
    }
}

TEST(UpperBound, ClosedFormValue) {
  EXPECT_DOUBLE_EQ(upper_bound_closed_form(100, 2.0), 300.0 / 30292.0);
  const int n = 10000;
  EXPECT_NEAR(upper_bound_closed_form(n, 1.5) * std::pow(n, 0.5), 1.0, 0.05);
}

TEST(UpperBound, ExactLemmaBelowClosedFormAndAboveGap) {
  for (int n : {12, 100, 400}) {
    for (double alpha : {1.25, 1.5, 2.0}) {
      const auto ub = upper_bound_gap(n, alpha);
      const auto g = gap(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
      EXPECT_GE(ub.estimate.value, g.value - 1e-10) << n << " " << alpha;
      EXPECT_LE(ub.witness_value, upper_bound_closed_form(n, alpha) + 1e-10) << n << " " << alpha;
      EXPECT_LE(ub.estimate.value, ub.witness_value + 1e-15);
      EXPECT_FALSE(ub.estimate.flags.has(Flag::level_mismatch));
    }
  }
}

TEST(UpperBound, ScalingAtAlphaThreeHalves) {
  const int n = 10000;
  const auto ub = upper_bound_gap(n, 1.5);
  EXPECT_NEAR(ub.witness_value * std::sqrt(n), 1.0, 0.05);
}

TEST(UpperBound, Preconditions) {
  const auto ub = upper_bound_gap(100, 1.0);
  EXPECT_TRUE(ub.estimate.flags.has(Flag::not_applicable));
  EXPECT_TRUE(std::isinf(ub.estimate.value));
  EXPECT_THROW(upper_bound_gap(4, 0.5), ConfigError);
}

TEST(Lemma2, RandomStoquasticOperators) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.05, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + trial % 10;
    std::vector<double> d(m), e(m - 1), lphi(m);
    for (auto& x : d) x = u(rng);
    for (auto& x : e) x = -pos(rng);
    for (auto& x : lphi) x = std::log(pos(rng));
    TridiagonalOperator<double> op(d, e);
    const double ground = oracle::diagonalise(op).values[0];
    EXPECT_LE(stoquastic_ground_lower_bound(op, lphi), ground + 1e-12);
  }
}

TEST(Sandwich, AboveAlphaOne) {
  for (int n : {64, 256, 1000, 3000}) {
    if (n % 4) continue;
    for (double alpha : {1.25, 1.5, 2.0}) {
      const auto b = bounds(n, alpha);
      const auto g = gap(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
      EXPECT_LE(b.lower, g.value + 1e-12);
      EXPECT_GE(b.upper, g.value - 1e-10);
      EXPECT_LE(b.lower, b.upper);
    }
  }
}

TEST(FirstExcited, SurvivesTheSpike) {
  for (int n : {8, 16, 32, 64, 256})
    for (double alpha : {1.25, 2.0}) EXPECT_NEAR(first_excited_shift(n, alpha), 0.0, 1e-9 * n);
}
