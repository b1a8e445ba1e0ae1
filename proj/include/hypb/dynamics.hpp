#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "hypb/table.hpp"

namespace hypb {

// (s, alpha) line element: boundary point plus the angle (clockwise from the
// inner normal) of the outgoing direction, |alpha| < pi/2.
struct PhasePoint {
    BoundaryPoint bp;
    double alpha = 0.0;
};

inline PhasePoint reverse(PhasePoint x) {
    x.alpha = -x.alpha;
    return x;
}

struct CollisionEvent {
    Point2 point;
    int piece = -1;
    Vec2 incoming, outgoing;
    double tau = 0.0;  // flight time from the previous collision
};

struct SingularEvent {
    enum Kind { corner_hit, tangential_hit, cap_exceeded } kind = corner_hit;
    Point2 location;
};

struct FlightRecord {
    PhasePoint start, end;
    double tau = 0.0;
    long long n_flat_hits = 0;
    bool entered_corridor = false;
    std::vector<CollisionEvent> flat_sample;  // first few flat collisions only
};

struct DynOptions {
    double t_min = 1e-9;
    double corner_tol = 1e-9;
    double tangential_tol = 1e-9;
    long long flat_cap = 10000000;
    bool use_strip_fast_path = true;
    int flat_sample_cap = 4;
};

using MapResult = std::variant<PhasePoint, SingularEvent>;
using FlightResult = std::variant<FlightRecord, SingularEvent>;

// outgoing unit direction of a phase point
Vec2 direction_of(const Table& table, const PhasePoint& x);
// phase point from a boundary hit with outgoing direction u
PhasePoint phase_from_hit(const Table& table, int piece, Point2 p, Vec2 outgoing);

// One collision of the full-boundary billiard map.
MapResult billiard_map(const Table& table, const PhasePoint& x, const DynOptions& opt = {});

// Gate crossing log entry for corridor traversals: trapezoid indices are
// 1-based; entering trapezoid i logs +i, leaving back through its entry gate
// logs -(i) as the particle returns to trapezoid i-1 (0 = bulk/mouth side).
struct CorridorVisit {
    int spiral = -1;
    int trapezoid = 0;
};

// First-return map to the section over the curved boundary pieces. Flat
// collisions are skipped but counted; rectangular strips are traversed in
// closed form. `visits` (optional) records corridor gate crossings.
FlightResult first_return_map(const Table& table, const PhasePoint& x,
                              const DynOptions& opt = {},
                              std::vector<CorridorVisit>* visits = nullptr);

enum class SampleDomain { section, full_boundary };

// Invariant-density sample: s uniform on the allowed arclength, alpha with
// density cos(alpha)/2.
PhasePoint sample_mu(std::mt19937_64& rng, const Table& table,
                     SampleDomain domain = SampleDomain::section);

// Counter-based per-orbit stream: changing the orbit count never reshuffles
// earlier orbits.
std::mt19937_64 orbit_rng(std::uint64_t root_seed, std::uint64_t orbit_index);
std::uint64_t splitmix64(std::uint64_t x);

struct Hit {
    double t = 0;
    Point2 point;
    int piece = -1;
};

// nearest forward collision of the ray with the boundary
bool nearest_hit(const Table& table, const Ray& ray, double t_min, Hit* out);

}  // namespace hypb
