// WKB tunnelling exponent on both sides of alpha + 2 beta = 1.
#include <cstdio>
#include <utility>

#include "spikegap/spikegap.hpp"

int main() {
  using namespace spikegap;
  std::vector<int> ns;
  for (int e = 10; e <= 15; ++e) ns.push_back(1 << e);
  for (auto [a, b] : {std::pair{0.15, 0.4}, {0.25, 0.4}, {0.4, 0.4}, {0.6, 0.1}, {0.6, 0.4}}) {
    const auto sw = wkb_sweep(a, b, ns);
    std::printf("alpha=%.2f beta=%.2f  %-15s  exponent %.3f (alpha/2+beta-1/2 = %.3f)  d(2^15)=%.4f\n", a, b,
                to_string(sw.points.front().verdict), sw.integral_fit.slope, a / 2 + b - 0.5, sw.points.back().d);
  }
}
