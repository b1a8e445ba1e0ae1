#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hypb/cones.hpp"
#include "hypb/lyapunov.hpp"

namespace hypb {

struct SurveyConfig {
    std::uint64_t seed = 1;
    long long n_orbits = 1000;
    int n_steps = 1000;
    bool parallel = true;      // OpenMP kernel; false = serial reference
    DynOptions dyn;
    double cone_tol = 1e-11;
    int max_resample_rounds = 8;  // replacement draws for singular orbits
};

struct ConeSurveyReport {
    std::uint64_t seed = 0;
    long long n_orbits = 0;
    int n_steps = 0;
    long long completed = 0;
    long long total_draws = 0;
    long long singular_corner = 0, singular_tangential = 0, singular_cap = 0;
    long long violations_total = 0;
    std::vector<Violation> violations;  // first 100, in orbit order
    std::array<long long, kCaseCount> case_counts{};
    std::array<long long, kCaseCount> nonstrict_counts{};
    std::array<double, kCaseCount> case_min_margin{};
    double min_margin = 1e300;
    long long infinity_touches = 0;
    long long orbits_without_strict = 0;
    int max_iv21_run = 0;
    std::vector<double> per_orbit_min_margin;   // completed orbits, orbit order
    std::vector<int> per_orbit_first_strict;    // completed orbits, orbit order
};

struct LyapunovSurveyReport {
    std::uint64_t seed = 0;
    long long n_orbits = 0;
    int n_steps = 0;
    bool reversed = false;
    long long completed = 0;
    long long excluded_short = 0;
    long long total_draws = 0;
    double lambda_mean = 0.0;
    double lambda_half_mean = 0.0;
    double stderr_stat = 0.0;
    double convergence_gap = 0.0;   // |lambda(n) - lambda(n/2)|
    double stderr_total = 0.0;      // stat + convergence
    long long cone_violations = 0;  // coherence: cone checks along the same orbits
    struct Row {
        std::uint64_t orbit_seed;
        double s0, alpha0;
        int n_eff;
        double lambda;
    };
    std::vector<Row> rows;
};

ConeSurveyReport run_cone_survey(const Table& table, const SurveyConfig& cfg);

struct LyapunovSurveyConfig : SurveyConfig {
    LyapunovOptions lyap;
    bool check_cones = false;  // coherence pass on the same orbits
};

LyapunovSurveyReport run_lyapunov_survey(const Table& table, const LyapunovSurveyConfig& cfg);

// C1 certificate grid margin, serial and OpenMP paths (exposed for the
// benchmark; check_C1 uses the same kernel).
double c1_grid_min_margin(const Table& table, int grid_d, int grid_f, bool parallel);

}  // namespace hypb
