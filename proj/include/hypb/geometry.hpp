#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hypb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 normalized() const {
        double n = norm();
        return {x / n, y / n};
    }
    // 90 degree counterclockwise rotation
    Vec2 perp() const { return {-y, x}; }
    Vec2 rotated(double a) const {
        double c = std::cos(a), s = std::sin(a);
        return {c * x - s * y, s * x + c * y};
    }
};

using Point2 = Vec2;

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dist(Point2 a, Point2 b) { return (a - b).norm(); }
inline Vec2 dir_of(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FlatPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Ray {
    Point2 origin;
    Vec2 direction;  // unit
};

// Circular arc, parametrized by the angle phi around `center`:
//   p(phi) = center + radius * (cos phi, sin phi),  phi in [start_angle, start_angle + sweep].
// Walking the table counterclockwise, focusing arcs have sweep > 0 and
// dispersing arcs sweep < 0; the signed curvature is sign(sweep) / radius.
struct ArcPiece {
    Point2 center;
    double radius = 1.0;
    double start_angle = 0.0;
    double sweep = 0.0;  // signed, != 0, focusing arcs |sweep| < pi

    double length() const { return radius * std::abs(sweep); }
    double curvature() const { return (sweep > 0 ? 1.0 : -1.0) / radius; }
    // s in [0, length]
    double angle_at(double s) const {
        return start_angle + (sweep > 0 ? 1.0 : -1.0) * s / radius;
    }
    Point2 point_at(double s) const {
        double phi = angle_at(s);
        return center + radius * dir_of(phi);
    }
    Vec2 tangent_at(double s) const {
        double phi = angle_at(s);
        Vec2 t = dir_of(phi).perp();
        return sweep > 0 ? t : -t;
    }
    Point2 start() const { return center + radius * dir_of(start_angle); }
    Point2 end() const { return center + radius * dir_of(start_angle + sweep); }
    // true if the circle angle phi falls inside the angular span
    bool contains_angle(double phi, double tol = 0.0) const;
};

struct SegmentPiece {
    Point2 a, b;

    double length() const { return dist(a, b); }
    Point2 point_at(double s) const { return a + (b - a) * (s / length()); }
    Vec2 tangent_at(double) const { return (b - a).normalized(); }
    Point2 start() const { return a; }
    Point2 end() const { return b; }
};

// beta parameter of the tangent discs D_beta; 0+ / 0- denote the two
// halfplanes bounded by the tangent line, so downstream logic never
// divides by zero.
struct Beta {
    enum Kind { finite, zero_plus, zero_minus, infinite } kind = finite;
    double value = 0.0;  // meaningful for kind == finite (value != 0)

    static Beta of(double v) { return {finite, v}; }
    static Beta zplus() { return {zero_plus, 0.0}; }
    static Beta zminus() { return {zero_minus, 0.0}; }
    static Beta inf() { return {infinite, 0.0}; }
};

// D_beta(s): for beta > 0 the closed disc of radius 1/|beta k(s)| tangent to
// the boundary at s on the internal side, for beta < 0 on the external side;
// D_{0+}/D_{0-} are the internal/external closed halfplanes of the tangent
// line t(s).
struct DiscRegion {
    enum Kind { disc, internal_halfplane, external_halfplane } kind = disc;
    Point2 center;        // disc only
    double radius = 0.0;  // disc only
    Point2 base;          // boundary point of tangency
    Vec2 inner_normal;    // inner normal at the base point
    Beta beta;
};

struct Intersection {
    double t;  // ray parameter, > 0
    Point2 point;
};

// All forward intersections of a ray with a piece, sorted by t ascending.
// Intersections with t <= t_min are discarded.
std::vector<Intersection> ray_intersect_arc(const Ray& ray, const ArcPiece& arc,
                                            double t_min = 1e-9);
std::vector<Intersection> ray_intersect_segment(const Ray& ray, const SegmentPiece& seg,
                                                double t_min = 1e-9);

// Intersections of the full line p + t*d (t in R) with the circle |x-c| = r.
// Returns 0, 1 or 2 parameter values sorted ascending.
int line_circle_intersect(Point2 p, Vec2 d, Point2 c, double r, double out_t[2]);

// Closed segment, possibly degenerate to a point.
struct Chord {
    Point2 a, b;
    bool degenerate() const { return dist(a, b) < 1e-14; }
};

bool region_contains(const DiscRegion& region, Point2 p, double tol = 0.0);
bool region_contains(const DiscRegion& region, const Chord& seg, double tol = 0.0);

// Signed distance of p to the inside of the region (positive inside).
double region_margin(const DiscRegion& region, Point2 p);
double region_margin(const DiscRegion& region, const Chord& seg);

// Intersection of segments (p0,p1) and (q0,q1), proper or endpoint touching.
bool segments_intersect(Point2 p0, Point2 p1, Point2 q0, Point2 q1, double tol = 0.0);

}  // namespace hypb
