#include "hypb/lyapunov.hpp"

#include <cmath>

namespace hypb {

namespace {

// one return step, optionally of the time-reversed dynamics or of the
// full-boundary map (for flat test tables the curved section is empty)
FlightResult one_step(const Table& table, const PhasePoint& x, const DynOptions& dyn,
                      const LyapunovOptions& opt) {
    auto step_plain = [&](const PhasePoint& y) -> FlightResult {
        if (!opt.full_boundary_section) return first_return_map(table, y, dyn);
        MapResult m = billiard_map(table, y, dyn);
        if (std::holds_alternative<SingularEvent>(m)) return std::get<SingularEvent>(m);
        FlightRecord rec;
        rec.start = y;
        rec.end = std::get<PhasePoint>(m);
        rec.tau = dist(table.point_at(y.bp), table.point_at(rec.end.bp));
        return rec;
    };
    if (!opt.reversed) return step_plain(x);
    FlightResult fr = step_plain(reverse(x));
    if (std::holds_alternative<SingularEvent>(fr)) return fr;
    FlightRecord rec = std::get<FlightRecord>(fr);
    FlightRecord out = rec;
    out.start = x;
    out.end = reverse(rec.end);
    return out;
}

}  // namespace

LyapunovOrbitResult lyapunov_orbit(const Table& table, const PhasePoint& x0, int n_steps,
                                   const TangentVector& v0, const DynOptions& dyn,
                                   const LyapunovOptions& opt) {
    LyapunovOrbitResult res;
    PhasePoint x = x0;
    TangentVector v = v0;
    double nrm = std::hypot(v.ds, v.dalpha);
    v.ds /= nrm;
    v.dalpha /= nrm;
    double sum = 0.0, comp = 0.0;  // Kahan
    double sum_half = 0.0;
    int accumulated = 0;
    int half = n_steps / 2;
    for (int step = 0; step < opt.burn_in + n_steps; ++step) {
        FlightResult fr = one_step(table, x, dyn, opt);
        if (std::holds_alternative<SingularEvent>(fr)) {
            res.truncated = true;
            break;
        }
        FlightRecord rec = std::get<FlightRecord>(fr);
        JacobianStep J = jacobian_step(table, rec);
        if (opt.reversed) {
            // conjugation by alpha -> -alpha
            J.m[1] = -J.m[1];
            J.m[2] = -J.m[2];
        }
        TangentVector w = J.apply(v);
        double g = std::hypot(w.ds, w.dalpha);
        v = {w.ds / g, w.dalpha / g};
        x = rec.end;
        if (step >= opt.burn_in) {
            double y = std::log(g) - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            accumulated++;
            if (accumulated == half) sum_half = sum;
        }
    }
    res.n_eff = accumulated;
    if (accumulated > 0) res.lambda = sum / accumulated;
    if (half > 0 && accumulated >= half) res.lambda_half = sum_half / half;
    return res;
}

}  // namespace hypb
