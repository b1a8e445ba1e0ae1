#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "hypb/dynamics.hpp"
#include "hypb/tangent.hpp"

namespace hypb {

// One-step tangent map of the section return map in (ds, dalpha), composed
// from beam-space flight and reflection blocks (flat bounces drop out, so
// only the accumulated flight time enters).
JacobianStep jacobian_step(const Table& table, const FlightRecord& rec);

// Projective action of the same step on the post-collision focal coordinate.
Mobius step_mobius(const Table& table, const FlightRecord& rec);

// Determinant of the step's tangent map, evaluated in extended precision
// from the closed-form composition (the double-precision matrix loses the
// cancellation on long grazing flights).
double jacobian_step_det(const Table& table, const FlightRecord& rec);

// Image of a closed projective interval in f+ under the step.
ProjInterval propagate_interval(const ProjInterval& iv, const FlightRecord& rec,
                                double k_end, double alpha_end);

enum class ConeClass { C0, C1, C2 };

struct Cone {
    ConeClass cls = ConeClass::C0;
    ProjInterval iv;
};

struct StepContext {
    Label current = Label::dispersing;
    Label prev = Label::dispersing;
    bool had_flat_hit = false;
};

// dispersing -> C0; focusing after focusing -> C2; focusing after dispersing:
// C1 without flat hits, C2 with them
Cone assign_cone(const StepContext& ctx, double alpha, double k);

enum class CaseTag : int {
    I = 0,
    II_1,
    II_2,
    III_1,
    III_2_1,
    III_2_2,
    IV_1,
    IV_2_1,
    IV_2_2
};
constexpr int kCaseCount = 9;
const char* case_name(CaseTag t);

CaseTag classify_case(const StepContext& ctx_in, const StepContext& ctx_out);

struct StepVerdict {
    bool invariant = false;
    bool strict = false;
    CaseTag tag = CaseTag::I;
    double margin = 0.0;  // signed projective containment margin
    bool touched_infinity = false;  // containment leaning on the closed -inf end of C1
};

// Push cone_in through the recorded flight and check containment in the cone
// assigned at the endpoint.
StepVerdict check_step(const Table& table, const FlightRecord& rec, const Cone& cone_in,
                       const StepContext& ctx_in, const StepContext& ctx_out,
                       double tol = 1e-11);

struct Violation {
    std::uint64_t orbit_id = 0;
    int step = 0;
    CaseTag tag = CaseTag::I;
    double margin = 0.0;
    double s0 = 0.0, alpha0 = 0.0;  // replay: initial condition of the orbit
};

struct OrbitReport {
    bool completed = false;
    int steps_checked = 0;
    int singular_kind = -1;  // SingularEvent::Kind or -1
    int first_strict = -1;   // n(x): 1-based index of the first strict step
    double min_margin = 1e300;
    std::array<long long, kCaseCount> case_counts{};
    std::array<long long, kCaseCount> nonstrict_counts{};
    std::array<double, kCaseCount> case_min_margin{};
    long long violations = 0;
    long long infinity_touches = 0;
    int max_iv21_run = 0;
};

OrbitReport verify_orbit(const Table& table, const PhasePoint& x0, int n_steps,
                         const DynOptions& opt = {}, double tol = 1e-11);

}  // namespace hypb
