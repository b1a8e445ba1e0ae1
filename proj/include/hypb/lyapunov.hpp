#pragma once

#include "hypb/cones.hpp"
#include "hypb/dynamics.hpp"

namespace hypb {

struct LyapunovOrbitResult {
    double lambda = 0.0;       // Birkhoff average of log growth after burn-in
    double lambda_half = 0.0;  // same, accumulated up to half the steps
    int n_eff = 0;             // accumulated steps
    bool truncated = false;
};

struct LyapunovOptions {
    int burn_in = 100;
    bool reversed = false;            // run the time-reversed dynamics
    bool full_boundary_section = false;  // use every piece (flat test tables)
};

LyapunovOrbitResult lyapunov_orbit(const Table& table, const PhasePoint& x0, int n_steps,
                                   const TangentVector& v0, const DynOptions& dyn = {},
                                   const LyapunovOptions& opt = {});

}  // namespace hypb
