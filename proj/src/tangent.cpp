#include "hypb/tangent.hpp"

namespace hypb {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
    a = std::fmod(a, kPi);
    if (a < 0) a += kPi;
    return a;
}
}  // namespace

double proj_offset(const FocalCoord& a, const FocalCoord& b) {
    return wrap_pi(b.angle() - a.angle());
}

double ProjInterval::width() const { return proj_offset(lo, hi); }

bool ProjInterval::contains(const FocalCoord& f, double tol) const {
    double off = proj_offset(lo, f);
    double w = width();
    if (off <= w + tol) return true;
    return off >= kPi - tol;  // just before lo
}

void ProjInterval::endpoint_margins(const ProjInterval& inner, double* m_lo,
                                    double* m_hi) const {
    double w = width();
    double off_lo = proj_offset(lo, inner.lo);
    if (off_lo > (kPi + w) / 2) off_lo -= kPi;  // allow slightly-outside-at-lo as negative
    *m_lo = off_lo;
    *m_hi = w - (off_lo + inner.width());
}

double ProjInterval::containment_margin(const ProjInterval& inner) const {
    double a, b;
    endpoint_margins(inner, &a, &b);
    return std::min(a, b);
}

double JacobianStep::norm() const {
    double s = 0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
}

std::pair<FocalCoord, FocalCoord> focal_from_vector(const TangentVector& v, double alpha,
                                                    double k) {
    if (v.ds == 0.0 && v.dalpha == 0.0) throw ZeroVectorError("zero tangent vector");
    double c = std::cos(alpha);
    // unified projective form; ds = 0 gives (0 : -dalpha) = 0 on both branches
    FocalCoord fp = FocalCoord::make(c * v.ds, k * v.ds - v.dalpha);
    FocalCoord fm = FocalCoord::make(c * v.ds, -k * v.ds - v.dalpha);
    return {fp, fm};
}

FocalCoord mirror_reflect(const FocalCoord& f_minus, double k, double alpha) {
    return Mobius::mirror(k, alpha).apply(f_minus);
}

FocalCoord free_flight(const FocalCoord& f_plus, double tau) {
    return Mobius::flight(tau).apply(f_plus);
}

Beta beta_of_focal(const FocalCoord& f_plus, double alpha, double k) {
    if (k == 0.0) throw FlatPointError("beta undefined at flat point");
    // beta = 2 cos(alpha) / (f+ |k|), projectively (2 cos(alpha) den : |k| num)
    double n = 2.0 * std::cos(alpha) * f_plus.den;
    double d = std::abs(k) * f_plus.num;
    if (d == 0.0) return n >= 0 ? Beta::inf() : Beta::inf();
    double b = n / d;
    if (b == 0.0) return f_plus.is_infinite() ? Beta::zplus() : Beta::zplus();
    return Beta::of(b);
}

FocalCoord focal_of_beta(const Beta& beta, double alpha, double k) {
    if (k == 0.0) throw FlatPointError("beta undefined at flat point");
    switch (beta.kind) {
        case Beta::zero_plus:
        case Beta::zero_minus:
            return FocalCoord::infinity();
        case Beta::infinite:
            return FocalCoord::of(0.0);
        case Beta::finite:
            return FocalCoord::make(2.0 * std::cos(alpha), beta.value * std::abs(k));
    }
    return FocalCoord::of(0.0);
}

Beta beta_reflect(const Beta& beta, double k) {
    if (k == 0.0) throw FlatPointError("beta reflection undefined at flat point");
    double s = k > 0 ? 1.0 : -1.0;
    switch (beta.kind) {
        case Beta::zero_plus:
        case Beta::zero_minus:
            return Beta::of(4.0 * s);
        case Beta::infinite:
            return Beta::inf();
        case Beta::finite: {
            double b = 4.0 * s - beta.value;
            if (b == 0.0) return beta.value > 0 ? Beta::zplus() : Beta::zminus();
            return Beta::of(b);
        }
    }
    return beta;
}

JacobianStep chart_to_beam(double k, double alpha) {
    double c = std::cos(alpha);
    return {{c, 0.0, k, -1.0}};
}

JacobianStep beam_to_chart_pre(double k, double alpha) {
    double c = std::cos(alpha);
    if (c < 1e-14) throw SingularStepError("grazing collision in tangent step");
    // inverse of (w, dtheta) = (c ds, -k ds - dalpha)
    return {{1.0 / c, 0.0, -k / c, -1.0}};
}

JacobianStep beam_flight(double tau) { return {{1.0, -tau, 0.0, 1.0}}; }

JacobianStep beam_reflect(double k, double alpha) {
    return {{1.0, 0.0, 2.0 * k / std::cos(alpha), 1.0}};
}

}  // namespace hypb
