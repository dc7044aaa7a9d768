// Minimum gap of the width-one spike and where it sits relative to s*.
#include <cstdio>

#include "spikegap/spikegap.hpp"

int main() {
  using namespace spikegap;
  for (int n : {500, 1000, 2000}) {
    const auto cost = CostModel::spike(SpikeParams::width_one(n, 1.0));
    const auto r = min_gap_scan(cost, SGrid{0.30, 0.45, 31}, 1e-8);
    std::printf("n=%5d  s_min=%.6f  (s*=%.6f)  gap=%.6g %s\n", n, r.s_min, critical_point(), r.gap.value,
                r.flags.to_string().c_str());
  }
}
