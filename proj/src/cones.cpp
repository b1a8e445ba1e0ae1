#include "hypb/cones.hpp"

#include <cmath>

namespace hypb {

JacobianStep jacobian_step(const Table& table, const FlightRecord& rec) {
    double k0 = table.curvature_at(rec.start.bp);
    double a0 = rec.start.alpha;
    double k1 = table.curvature_at(rec.end.bp);
    double a1 = rec.end.alpha;
    // chart -> beam at departure, total flight, reflection, beam -> chart
    JacobianStep m = chart_to_beam(k0, a0)
                         .then(beam_flight(rec.tau))
                         .then(beam_reflect(k1, a1));
    double c1 = std::cos(a1);
    if (c1 < 1e-14) throw SingularStepError("grazing endpoint in jacobian_step");
    JacobianStep from_beam{{1.0 / c1, 0.0, k1 / c1, -1.0}};
    m = m.then(from_beam);
    // every mirror reflection flips the transversal orientation of the beam
    // frame; the sign is fixed against finite differences of the return map
    if (rec.n_flat_hits % 2 == 0)
        for (double& e : m.m) e = -e;
    return m;
}

Mobius step_mobius(const Table& table, const FlightRecord& rec) {
    double k1 = table.curvature_at(rec.end.bp);
    double a1 = rec.end.alpha;
    return Mobius::flight(rec.tau).then(Mobius::mirror(k1, a1));
}

double jacobian_step_det(const Table& table, const FlightRecord& rec) {
    long double k0 = table.curvature_at(rec.start.bp);
    long double k1 = table.curvature_at(rec.end.bp);
    long double c0 = std::cos(static_cast<long double>(rec.start.alpha));
    long double c1 = std::cos(static_cast<long double>(rec.end.alpha));
    long double tau = rec.tau;
    long double m00 = (c0 - tau * k0) / c1;
    long double m01 = tau / c1;
    long double m10 = -(k1 / c1) * (c0 - tau * k0) - k0;
    long double m11 = 1.0L - tau * k1 / c1;
    return static_cast<double>(m00 * m11 - m01 * m10);
}

ProjInterval propagate_interval(const ProjInterval& iv, const FlightRecord& rec,
                                double k_end, double alpha_end) {
    Mobius m = Mobius::flight(rec.tau).then(Mobius::mirror(k_end, alpha_end));
    return iv.map(m);
}

Cone assign_cone(const StepContext& ctx, double alpha, double k) {
    Cone c;
    double ca = std::cos(alpha);
    if (ctx.current == Label::dispersing) {
        c.cls = ConeClass::C0;
        c.iv = ProjInterval::of(FocalCoord::of(-ca / std::abs(k)), FocalCoord::of(0.0));
        return c;
    }
    if (ctx.prev == Label::focusing || ctx.had_flat_hit) {
        c.cls = ConeClass::C2;
        c.iv = ProjInterval::of(FocalCoord::of(ca / (2 * k)), FocalCoord::of(ca / k));
        return c;
    }
    c.cls = ConeClass::C1;
    c.iv = ProjInterval::of(FocalCoord::infinity(), FocalCoord::of(0.0));
    return c;
}

const char* case_name(CaseTag t) {
    switch (t) {
        case CaseTag::I: return "I";
        case CaseTag::II_1: return "II.1";
        case CaseTag::II_2: return "II.2";
        case CaseTag::III_1: return "III.1";
        case CaseTag::III_2_1: return "III.2.1";
        case CaseTag::III_2_2: return "III.2.2";
        case CaseTag::IV_1: return "IV.1";
        case CaseTag::IV_2_1: return "IV.2.1";
        case CaseTag::IV_2_2: return "IV.2.2";
    }
    return "?";
}

CaseTag classify_case(const StepContext& ctx_in, const StepContext& ctx_out) {
    Label from = ctx_in.current;
    Label to = ctx_out.current;
    bool flats = ctx_out.had_flat_hit;
    bool in_c1 = ctx_in.current == Label::focusing &&
                 !(ctx_in.prev == Label::focusing || ctx_in.had_flat_hit);
    if (from == Label::dispersing && to == Label::dispersing) return CaseTag::I;
    if (from == Label::dispersing && to == Label::focusing)
        return flats ? CaseTag::II_2 : CaseTag::II_1;
    if (from == Label::focusing && to == Label::dispersing) {
        if (in_c1) return CaseTag::III_1;
        return flats ? CaseTag::III_2_2 : CaseTag::III_2_1;
    }
    if (in_c1) return CaseTag::IV_1;
    return flats ? CaseTag::IV_2_2 : CaseTag::IV_2_1;
}

StepVerdict check_step(const Table& table, const FlightRecord& rec, const Cone& cone_in,
                       const StepContext& ctx_in, const StepContext& ctx_out, double tol) {
    StepVerdict v;
    v.tag = classify_case(ctx_in, ctx_out);
    double k1 = table.curvature_at(rec.end.bp);
    ProjInterval image = propagate_interval(cone_in.iv, rec, k1, rec.end.alpha);
    Cone target = assign_cone(ctx_out, rec.end.alpha, k1);
    double m_lo, m_hi;
    target.iv.endpoint_margins(image, &m_lo, &m_hi);
    v.margin = std::min(m_lo, m_hi);
    v.invariant = v.margin >= -tol;
    if (cone_in.cls == ConeClass::C1 && std::abs(m_lo) <= tol) {
        // image.lo is the image of the projective closure point at -infinity;
        // the bundle's cone is open there, so strictness is judged at the
        // finite end and the boundary touch is reported separately
        v.touched_infinity = true;
        v.margin = m_hi;
    }
    v.strict = v.invariant && v.margin > tol;
    return v;
}

namespace {

StepContext context_of(const Table& table, const FlightRecord& rec) {
    StepContext c;
    c.current = table.pieces[rec.end.bp.piece].label;
    c.prev = table.pieces[rec.start.bp.piece].label;
    c.had_flat_hit = rec.n_flat_hits > 0;
    return c;
}

}  // namespace

OrbitReport verify_orbit(const Table& table, const PhasePoint& x0, int n_steps,
                         const DynOptions& opt, double tol) {
    OrbitReport rep;
    rep.case_min_margin.fill(1e300);
    PhasePoint x = x0;
    // bootstrap: the first return establishes the incoming context
    FlightResult fr = first_return_map(table, x, opt);
    if (std::holds_alternative<SingularEvent>(fr)) {
        rep.singular_kind = std::get<SingularEvent>(fr).kind;
        return rep;
    }
    FlightRecord rec = std::get<FlightRecord>(fr);
    StepContext ctx = context_of(table, rec);
    x = rec.end;
    Cone cone = assign_cone(ctx, x.alpha, table.curvature_at(x.bp));
    int iv21_run = 0;
    for (int step = 1; step <= n_steps; ++step) {
        fr = first_return_map(table, x, opt);
        if (std::holds_alternative<SingularEvent>(fr)) {
            rep.singular_kind = std::get<SingularEvent>(fr).kind;
            return rep;
        }
        rec = std::get<FlightRecord>(fr);
        StepContext ctx_out = context_of(table, rec);
        StepVerdict v = check_step(table, rec, cone, ctx, ctx_out, tol);
        rep.steps_checked++;
        int t = static_cast<int>(v.tag);
        rep.case_counts[t]++;
        rep.case_min_margin[t] = std::min(rep.case_min_margin[t], v.margin);
        rep.min_margin = std::min(rep.min_margin, v.margin);
        if (!v.invariant) rep.violations++;
        if (v.invariant && !v.strict) rep.nonstrict_counts[t]++;
        if (v.strict && rep.first_strict < 0) rep.first_strict = step;
        if (v.touched_infinity) rep.infinity_touches++;
        if (v.tag == CaseTag::IV_2_1) {
            iv21_run++;
            rep.max_iv21_run = std::max(rep.max_iv21_run, iv21_run);
        } else {
            iv21_run = 0;
        }
        x = rec.end;
        ctx = ctx_out;
        cone = assign_cone(ctx, x.alpha, table.curvature_at(x.bp));
    }
    rep.completed = true;
    return rep;
}

}  // namespace hypb
