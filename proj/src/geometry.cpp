#include "hypb/geometry.hpp"

#include <algorithm>

namespace hypb {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_2pi(double a) {
    a = std::fmod(a, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    return a;
}
}  // namespace

bool ArcPiece::contains_angle(double phi, double tol) const {
    // Measure the angular offset from start_angle in the sweep direction.
    double off = sweep > 0 ? wrap_2pi(phi - start_angle) : wrap_2pi(start_angle - phi);
    double span = std::abs(sweep);
    if (off <= span + tol) return true;
    // offsets just below 2*pi are "before the start"
    return off >= 2 * kPi - tol;
}

int line_circle_intersect(Point2 p, Vec2 d, Point2 c, double r, double out_t[2]) {
    // |p + t d - c|^2 = r^2 with |d| = 1. Stable form: t^2 + 2 b t + cc = 0.
    Vec2 m = p - c;
    double b = m.dot(d);
    double cc = m.norm2() - r * r;
    double disc = b * b - cc;
    if (disc < 0) return 0;
    double sq = std::sqrt(disc);
    // Avoid cancellation: compute the larger-magnitude root first.
    double q = -(b + std::copysign(sq, b));
    double t0, t1;
    if (q == 0.0) {
        t0 = t1 = -b;
    } else {
        t0 = q;
        t1 = cc / q;
    }
    if (t0 > t1) std::swap(t0, t1);
    out_t[0] = t0;
    out_t[1] = t1;
    return disc == 0.0 ? 1 : 2;
}

std::vector<Intersection> ray_intersect_arc(const Ray& ray, const ArcPiece& arc,
                                            double t_min) {
    std::vector<Intersection> hits;
    double ts[2];
    int n = line_circle_intersect(ray.origin, ray.direction, arc.center, arc.radius, ts);
    for (int i = 0; i < n; ++i) {
        if (i == 1 && ts[1] == ts[0]) break;
        double t = ts[i];
        if (t <= t_min) continue;
        Point2 p = ray.origin + t * ray.direction;
        double phi = std::atan2(p.y - arc.center.y, p.x - arc.center.x);
        if (!arc.contains_angle(phi)) continue;
        // project the point exactly onto the circle
        p = arc.center + arc.radius * dir_of(phi);
        hits.push_back({t, p});
    }
    return hits;
}

std::vector<Intersection> ray_intersect_segment(const Ray& ray, const SegmentPiece& seg,
                                                double t_min) {
    std::vector<Intersection> hits;
    Vec2 e = seg.b - seg.a;
    double denom = ray.direction.cross(e);
    if (denom == 0.0) return hits;  // parallel (collinear overlap treated as a miss)
    // Solve origin + t*dir = a + u*e.
    Vec2 w = seg.a - ray.origin;
    double t = w.cross(e) / denom;
    double u = w.cross(ray.direction) / denom;
    if (t <= t_min || u < 0.0 || u > 1.0) return hits;
    hits.push_back({t, seg.a + u * e});
    return hits;
}

bool region_contains(const DiscRegion& region, Point2 p, double tol) {
    return region_margin(region, p) >= -tol;
}

bool region_contains(const DiscRegion& region, const Chord& seg, double tol) {
    // Discs and halfplanes are convex, so endpoint containment suffices.
    return region_contains(region, seg.a, tol) && region_contains(region, seg.b, tol);
}

double region_margin(const DiscRegion& region, Point2 p) {
    switch (region.kind) {
        case DiscRegion::disc:
            return region.radius - dist(p, region.center);
        case DiscRegion::internal_halfplane:
            return (p - region.base).dot(region.inner_normal);
        case DiscRegion::external_halfplane:
            return -(p - region.base).dot(region.inner_normal);
    }
    return 0.0;
}

double region_margin(const DiscRegion& region, const Chord& seg) {
    return std::min(region_margin(region, seg.a), region_margin(region, seg.b));
}

bool segments_intersect(Point2 p0, Point2 p1, Point2 q0, Point2 q1, double tol) {
    Vec2 r = p1 - p0, s = q1 - q0;
    double rxs = r.cross(s);
    Vec2 qp = q0 - p0;
    if (std::abs(rxs) < 1e-15 * std::max(r.norm() * s.norm(), 1e-300)) {
        // parallel: check collinear overlap
        if (std::abs(qp.cross(r)) > tol * std::max(1.0, r.norm())) return false;
        double rr = r.norm2();
        if (rr == 0) return dist(p0, q0) <= tol;
        double t0 = qp.dot(r) / rr;
        double t1 = (q1 - p0).dot(r) / rr;
        if (t0 > t1) std::swap(t0, t1);
        return t0 <= 1.0 + tol && t1 >= -tol;
    }
    double t = qp.cross(s) / rxs;
    double u = qp.cross(r) / rxs;
    double tt = tol / std::max(r.norm(), 1e-300);
    double tu = tol / std::max(s.norm(), 1e-300);
    return t >= -tt && t <= 1.0 + tt && u >= -tu && u <= 1.0 + tu;
}

}  // namespace hypb
