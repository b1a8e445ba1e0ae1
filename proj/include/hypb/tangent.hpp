#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "hypb/geometry.hpp"

namespace hypb {

struct ZeroVectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularStepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Focal distance of an infinitesimal beam as a point of the real projective
// line: f = num/den, stored normalized (num^2 + den^2 = 1, den >= 0; the
// point at infinity is (1, 0)). Never compared through float sentinels.
struct FocalCoord {
    double num = 0.0;
    double den = 1.0;

    static FocalCoord of(double v) { return make(v, 1.0); }
    static FocalCoord infinity() { return make(1.0, 0.0); }
    static FocalCoord make(double n, double d) {
        double s = std::hypot(n, d);
        if (s == 0.0) throw ZeroVectorError("focal coordinate (0:0)");
        n /= s;
        d /= s;
        if (d < 0.0 || (d == 0.0 && n < 0.0)) {
            n = -n;
            d = -d;
        }
        return FocalCoord{n, d};
    }

    bool is_infinite() const { return den == 0.0; }
    double value() const { return num / den; }  // +-inf when infinite

    // Chart angle psi = atan2(num, den) in (-pi/2, pi/2]; f = tan(psi).
    // The projective line is the circle psi mod pi.
    double angle() const { return std::atan2(num, den); }

    FocalCoord() = default;

private:
    FocalCoord(double n, double d) : num(n), den(d) {}
    friend struct Mobius;
};

// Real Moebius transform f -> (a f + b) / (c f + d) acting on (num : den).
// All maps used here have positive determinant and hence preserve the cyclic
// orientation of the projective line.
struct Mobius {
    double a = 1, b = 0, c = 0, d = 1;

    static Mobius identity() { return {}; }
    static Mobius flight(double tau) { return {1.0, -tau, 0.0, 1.0}; }
    // mirror equation -1/f- + 1/f+ = 2k/cos(alpha), solved for f+
    static Mobius mirror(double k, double alpha) {
        return {1.0, 0.0, 2.0 * k / std::cos(alpha), 1.0};
    }

    Mobius then(const Mobius& g) const {  // apply *this first, then g
        return {g.a * a + g.b * c, g.a * b + g.b * d,
                g.c * a + g.d * c, g.c * b + g.d * d};
    }
    FocalCoord apply(const FocalCoord& f) const {
        return FocalCoord::make(a * f.num + b * f.den, c * f.num + d * f.den);
    }
    double det() const { return a * d - b * c; }
};

// Closed arc of the projective line from `lo` to `hi` in the direction of
// increasing f (wrapping through infinity when needed). Width is measured in
// the chart angle psi (mod pi).
struct ProjInterval {
    FocalCoord lo, hi;

    static ProjInterval of(FocalCoord a, FocalCoord b) { return {a, b}; }
    static ProjInterval point(FocalCoord a) { return {a, a}; }

    double width() const;  // in [0, pi)
    bool contains(const FocalCoord& f, double tol = 0.0) const;
    // Signed containment margin of `inner` in *this (in chart angle,
    // positive when strictly inside; min over the two ends).
    double containment_margin(const ProjInterval& inner) const;
    // per-endpoint margins: lo end and hi end separately
    void endpoint_margins(const ProjInterval& inner, double* m_lo, double* m_hi) const;
    // Image under an orientation-preserving Moebius map.
    ProjInterval map(const Mobius& m) const { return {m.apply(lo), m.apply(hi)}; }
};

// angular offset from a to b in the direction of increasing f, in [0, pi)
double proj_offset(const FocalCoord& a, const FocalCoord& b);

struct TangentVector {
    double ds = 0.0;
    double dalpha = 0.0;
};

// 2x2 matrix acting on (ds, dalpha)
struct JacobianStep {
    std::array<double, 4> m{1, 0, 0, 1};  // row-major

    TangentVector apply(const TangentVector& v) const {
        return {m[0] * v.ds + m[1] * v.dalpha, m[2] * v.ds + m[3] * v.dalpha};
    }
    JacobianStep then(const JacobianStep& g) const {
        const auto& a = m;
        const auto& b = g.m;
        return {{b[0] * a[0] + b[1] * a[2], b[0] * a[1] + b[1] * a[3],
                 b[2] * a[0] + b[3] * a[2], b[2] * a[1] + b[3] * a[3]}};
    }
    double det() const { return m[0] * m[3] - m[1] * m[2]; }
    double norm() const;
};

// f+- of the beam generated by v = (ds, dalpha) at a collision point with
// curvature k and reflection angle alpha:
//   f+- = cos(alpha) ds / (+-k ds - dalpha),   both 0 when ds = 0.
std::pair<FocalCoord, FocalCoord> focal_from_vector(const TangentVector& v, double alpha,
                                                    double k);

FocalCoord mirror_reflect(const FocalCoord& f_minus, double k, double alpha);
FocalCoord free_flight(const FocalCoord& f_plus, double tau);

// Dictionary between f+ and the disc parameter beta:
// F+ on the boundary circle of D_beta(s) iff f+ = 2 cos(alpha) / (beta |k|).
Beta beta_of_focal(const FocalCoord& f_plus, double alpha, double k);
FocalCoord focal_of_beta(const Beta& beta, double alpha, double k);

// beta' = 4 sgn(k) - beta
Beta beta_reflect(const Beta& beta, double k);

// Beam-space blocks in (w, dtheta) = (transversal width, direction spread):
//   f = w / dtheta, flight tau: [[1, -tau], [0, 1]],
//   reflection (k, alpha):      [[1, 0], [2k/cos(alpha), 1]].
// Chart blocks between (ds, dalpha) and (w, dtheta) at a collision point.
JacobianStep chart_to_beam(double k, double alpha);        // post-collision
JacobianStep beam_to_chart_pre(double k, double alpha);    // pre-collision, inverted
JacobianStep beam_flight(double tau);
JacobianStep beam_reflect(double k, double alpha);

}  // namespace hypb
