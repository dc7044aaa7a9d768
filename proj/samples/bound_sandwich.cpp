// Variational lower bound <= exact gap <= stoquastic upper bound at s*.
#include <cstdio>

#include "spikegap/spikegap.hpp"

int main() {
  using namespace spikegap;
  const double alpha = 1.5;
  for (int n : {256, 512, 1024, 2048}) {
    const auto b = bounds(n, alpha);
    const auto g = gap(CostModel::spike(SpikeParams::width_one(n, alpha)), critical_point());
    std::printf("n=%5d  %.4e <= %.4e <= %.4e   upper/lower=%.2f\n", n, b.lower, g.value, b.upper, b.upper / b.lower);
  }
}
