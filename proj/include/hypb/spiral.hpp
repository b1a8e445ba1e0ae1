#pragma once

#include "hypb/table.hpp"

namespace hypb {

// (cos(2 pi / n))^{-n} - 1, the per-round radial growth of the regular
// double spiral; monotone decreasing, n * wrap_factor(n) / (2 pi^2) -> 1.
double wrap_factor(long long n_bar);

struct SpiralBuildResult {
    Table table;
    SpiralParams params;
    GeometryCertificate certificate;
};

// Build the bounded-diameter table: the bulk of the main table with both
// strips replaced by polygonal spiral corridors wound around it as a regular
// double spiral. `partial` may preset r0 (0 = auto from {3,4,5,6}), prefix
// counts, the prefix angle and the gap fraction.
SpiralBuildResult build_spiral_table(double k_d, double k_f,
                                     const SpiralParams& partial = {},
                                     const C1Options& c1_opt = {},
                                     double h_o_hint = 0.0);

}  // namespace hypb
