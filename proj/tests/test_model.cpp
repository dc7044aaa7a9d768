#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles/dense.hpp"
#include "spikegap/model.hpp"
#include "spikegap/precision.hpp"

using namespace spikegap;

TEST(Cost, WidthOneSpikeAtQuarter) {
  const auto p = SpikeParams::width_one(100, 1.0);
  EXPECT_DOUBLE_EQ(cost(p, 25), 100.0);
  EXPECT_DOUBLE_EQ(cost(p, 26), 26.0);
  EXPECT_DOUBLE_EQ(cost(p, 24), 24.0);
}

TEST(Cost, WideSpikeHeight) {
  const auto p = SpikeParams::with_width(256, 0.5, 0.25);
  const double height = 0.75 * std::sqrt(256.0);
  EXPECT_DOUBLE_EQ(cost(p, 64), 64.0 + height);
  EXPECT_DOUBLE_EQ(cost(p, 64), 76.0);
}

TEST(Cost, OutOfRangeThrows) {
  const auto p = SpikeParams::width_one(8, 1.0);
  EXPECT_THROW(cost(p, -1), DomainError);
  EXPECT_THROW(cost(p, 9), DomainError);
}

TEST(SpikeParams, RejectsBadN) {
  EXPECT_THROW(SpikeParams::width_one(10, 1.0).validate(), DomainError);
  EXPECT_THROW(SpikeParams::width_one(0, 1.0).validate(), DomainError);
  // n^beta / 2 = 16 > n/4 = 8, region leaks below 0
  EXPECT_THROW(SpikeParams::with_width(32, 0.5, 1.0).validate(), DomainError);
}

TEST(SpikeParams, StrictWindow) {
  // n^beta / 2 = 2 exactly: boundary points excluded
  const auto p = SpikeParams::with_width(256, 0.5, 0.25);
  EXPECT_EQ(p.window(), (std::pair<int, int>{63, 65}));
  // beta = 0 reduces to the single centre point
  EXPECT_EQ(SpikeParams::with_width(400, 0.5, 0.0).window(), (std::pair<int, int>{100, 100}));
  EXPECT_EQ(SpikeParams::width_one(400, 0.5).window(), (std::pair<int, int>{100, 100}));
  // non-integer half width: n^0.4 / 2 = 7.92.. at n = 1000 (n/4 = 250)
  EXPECT_EQ(SpikeParams::with_width(1000, 0.5, 0.4).window(), (std::pair<int, int>{243, 257}));
}

TEST(AdiabaticPoint, CriticalPoint) {
  EXPECT_NEAR(critical_point(), 0.36602540378443865, 1e-15);
  const AdiabaticPoint p(critical_point());
  EXPECT_NEAR(p.cos_theta, 0.5, 1e-15);
  EXPECT_NEAR(p.sin_theta, std::sqrt(3.0) / 2, 1e-15);
  EXPECT_NEAR(p.norm_factor, std::sqrt(3.0) - 1, 1e-15);
  EXPECT_NEAR(p.theta, std::numbers::pi / 3, 1e-15);
}

TEST(AdiabaticPoint, Endpoints) {
  const AdiabaticPoint a(0.0), b(1.0);
  EXPECT_DOUBLE_EQ(a.theta, std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(b.theta, 0.0);
  EXPECT_THROW(AdiabaticPoint(1.5), DomainError);
  for (double s = 0.0; s <= 1.0; s += 0.05) {
    const AdiabaticPoint p(s);
    EXPECT_NEAR(p.sin_theta * p.sin_theta + p.cos_theta * p.cos_theta, 1.0, 1e-15);
    EXPECT_NEAR(AdiabaticPoint::from_theta(p.theta).s, s, 1e-14);
  }
}

TEST(Hamiltonian, DriverOnlyAtZero) {
  const auto op = build_hamiltonian(CostModel::spike(SpikeParams::width_one(4, 1.0)), 0.0);
  for (double d : op.diag) EXPECT_DOUBLE_EQ(d, 0.0);
  EXPECT_DOUBLE_EQ(op.offdiag[1], -1.0);
  EXPECT_DOUBLE_EQ(op.offdiag[2], -std::sqrt(6.0) / 2);
  EXPECT_DOUBLE_EQ(op.offdiag[3], -std::sqrt(6.0) / 2);
  EXPECT_DOUBLE_EQ(op.offdiag[4], -1.0);
}

TEST(Hamiltonian, ClassicalAtOne) {
  const auto op = build_hamiltonian(CostModel::spike(SpikeParams::width_one(4, 1.0)), 1.0);
  for (std::size_t k = 1; k < op.dim(); ++k) EXPECT_DOUBLE_EQ(op.offdiag[k], 0.0);
  EXPECT_DOUBLE_EQ(op.diag[0], -2.0);
  EXPECT_DOUBLE_EQ(op.diag[1], -1.0 + 3.0);  // spike at k = 1: 3/4 * 4
  EXPECT_DOUBLE_EQ(op.diag[2], 0.0);
  EXPECT_DOUBLE_EQ(op.diag[4], 2.0);
}

TEST(Hamiltonian, MatchesPauliProjection) {
  for (int n : {4, 8, 12}) {
    for (double s : {0.0, 0.1, critical_point(), 0.5, 0.9, 1.0}) {
      for (const auto& cost : {CostModel::spike(SpikeParams::width_one(n, 1.0)),
                               CostModel::spike(SpikeParams::with_width(n, 0.7, 0.3)), CostModel::spikeless(n)}) {
        const auto a = oracle::dense(build_hamiltonian(cost, s));
        const auto b = oracle::pauli_projection(cost, s);
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12) << cost.describe() << " s=" << s;
      }
    }
  }
}

TEST(Hamiltonian, Stoquastic) {
  const auto cost = CostModel::spike(SpikeParams::with_width(64, 0.5, 0.4));
  for (double s : {0.01, 0.3, 0.6, 0.99}) {
    const auto op = build_hamiltonian(cost, s);
    for (std::size_t k = 1; k < op.dim(); ++k) EXPECT_LT(op.offdiag[k], 0.0);
  }
}

TEST(Hamiltonian, SpikelessSpectrumIsLadder) {
  for (int n : {4, 8, 12, 40}) {
    for (double s : {0.05, 0.37, 0.8}) {
      const auto e = oracle::diagonalise(build_hamiltonian(CostModel::spikeless(n), s)).values;
      for (int m = 0; m <= n; ++m) EXPECT_NEAR(e[m], -n / 2.0 + m, 1e-10 * n);
    }
  }
}

TEST(Hamiltonian, ExtendedPrecisionAgrees) {
  const auto cost = CostModel::spike(SpikeParams::width_one(40, 1.0));
  const auto a = build_hamiltonian<double>(cost, 0.3);
  const auto b = build_hamiltonian<Quad>(cost, 0.3);
  for (std::size_t k = 0; k < a.dim(); ++k) {
    EXPECT_NEAR(a.diag[k], static_cast<double>(b.diag[k]), 1e-14 * 40);
    EXPECT_NEAR(a.offdiag[k], static_cast<double>(b.offdiag[k]), 1e-14 * 40);
  }
}

TEST(CostModel, CubicTableMatchesPolynomialMean) {
  // E over Bin(n, u) of the table equals (n/2)^3 g(u)
  const int n = 30;
  const auto cost = CostModel::cubic(n, 3.0);
  for (double u : {0.1, 0.35, 0.8}) {
    double mean = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double lp = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                        k * std::log(u) + (n - k) * std::log1p(-u);
      mean += std::exp(lp) * cost.h(k);
    }
    EXPECT_NEAR(mean, std::pow(n / 2.0, 3) * cubic_g(3.0, u), 1e-9 * std::pow(n / 2.0, 3));
  }
  EXPECT_DOUBLE_EQ(cost.driver(), 450.0);
}

TEST(CostModel, CustomValidation) {
  EXPECT_THROW(CostModel::custom({1.0}), DomainError);
  EXPECT_THROW(CostModel::custom({0.0, NAN, 1.0}), DomainError);
  EXPECT_THROW(CostModel::custom({0.0, 1.0}, -1.0), DomainError);
  const auto c = CostModel::custom({0.0, 2.0, 1.0});
  EXPECT_EQ(c.n(), 2);
  EXPECT_DOUBLE_EQ(c.h(1), 2.0);
}
