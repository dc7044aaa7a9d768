// Where the nodes of spikeless excited states cross n/4, and the gap dips they predict.
#include <cstdio>

#include "spikegap/spikegap.hpp"

int main() {
  using namespace spikegap;
  const int n = 2000;
  const auto order = ordering_theorem_check(n, 5);
  std::printf("first-node ordering holds: %s\n", order.holds ? "yes" : "no");
  for (int t = 1; t <= 5; ++t) {
    const auto p = verify_crossing(n, 1.0, predict_crossing(n, t, 1));
    std::printf("t=%d  s_t=%.6f  dip at %.6f  gap_t=%.4g  off-dip %.4g\n", t, p.s_t_i, *p.s_dip, *p.verified_gap,
                *p.off_dip_gap);
  }
}
