// Peak |B| for the smooth parity inversions as the steepness grows.
#include <cstdio>

#include "cvbell/cvbell.hpp"

int main() {
  const auto state = cvbell::EprState::from_mean_photon(10.0);
  const std::vector<double> steepness{1.0, 2.0, 10.0, 100.0};
  for (int l = 1; l <= 3; ++l) {
    for (const auto& row : cvbell::unsharp_threshold(state, l, steepness)) {
      std::printf("f%d s=%-6g d*=%.5f |B|*=%.5f%s\n", l, row.s, row.peak.d_star, row.peak.b_star,
                  row.violates ? "  violates" : "");
    }
  }
}
