#include "hypb/survey.hpp"

#include <algorithm>
#include <cmath>

namespace hypb {

namespace {

struct OrbitSlot {
    OrbitReport cones;
    LyapunovOrbitResult lyap;
    std::vector<Violation> details;
    double s0 = 0, alpha0 = 0;
    std::uint64_t orbit_seed = 0;
    bool drawn = false;
};

// single-pass orbit walker shared by the cone and exponent surveys
void walk_orbit(const Table& table, const PhasePoint& x0, int n_steps, const DynOptions& dyn,
                double tol, bool do_cones, bool do_lyap, const TangentVector& v0,
                const LyapunovOptions& lyap_opt, OrbitSlot* slot) {
    OrbitReport& rep = slot->cones;
    rep.case_min_margin.fill(1e300);
    if (do_lyap && (lyap_opt.full_boundary_section || lyap_opt.reversed)) {
        // these modes have no cone bundle; fall back to the plain estimator
        slot->lyap = lyapunov_orbit(table, x0, n_steps, v0, dyn, lyap_opt);
        rep.completed = !slot->lyap.truncated;
        rep.steps_checked = slot->lyap.n_eff;
        return;
    }

    PhasePoint x = x0;
    TangentVector v = v0;
    double nrm = std::hypot(v.ds, v.dalpha);
    if (nrm == 0) nrm = 1;
    v = {v.ds / nrm, v.dalpha / nrm};
    double sum = 0, comp = 0, sum_half = 0;
    int accumulated = 0;
    int half = n_steps / 2;
    int burn = do_lyap ? lyap_opt.burn_in : 0;

    FlightResult fr = first_return_map(table, x, dyn);
    if (std::holds_alternative<SingularEvent>(fr)) {
        rep.singular_kind = std::get<SingularEvent>(fr).kind;
        slot->lyap.truncated = true;
        return;
    }
    FlightRecord rec = std::get<FlightRecord>(fr);
    StepContext ctx;
    ctx.current = table.pieces[rec.end.bp.piece].label;
    ctx.prev = table.pieces[rec.start.bp.piece].label;
    ctx.had_flat_hit = rec.n_flat_hits > 0;
    x = rec.end;
    Cone cone = do_cones ? assign_cone(ctx, x.alpha, table.curvature_at(x.bp)) : Cone{};
    if (do_lyap) {
        // bootstrap step contributes to the tangent product as step 0
        JacobianStep J = jacobian_step(table, rec);
        TangentVector w = J.apply(v);
        double g = std::hypot(w.ds, w.dalpha);
        v = {w.ds / g, w.dalpha / g};
    }
    int iv21_run = 0;
    int total = burn + n_steps;
    for (int step = 1; step <= total; ++step) {
        fr = first_return_map(table, x, dyn);
        if (std::holds_alternative<SingularEvent>(fr)) {
            rep.singular_kind = std::get<SingularEvent>(fr).kind;
            slot->lyap.truncated = true;
            slot->lyap.n_eff = accumulated;
            if (accumulated > 0) slot->lyap.lambda = sum / accumulated;
            return;
        }
        rec = std::get<FlightRecord>(fr);
        StepContext ctx_out;
        ctx_out.current = table.pieces[rec.end.bp.piece].label;
        ctx_out.prev = table.pieces[rec.start.bp.piece].label;
        ctx_out.had_flat_hit = rec.n_flat_hits > 0;
        if (do_cones) {
            StepVerdict vd = check_step(table, rec, cone, ctx, ctx_out, tol);
            rep.steps_checked++;
            int t = static_cast<int>(vd.tag);
            rep.case_counts[t]++;
            rep.case_min_margin[t] = std::min(rep.case_min_margin[t], vd.margin);
            rep.min_margin = std::min(rep.min_margin, vd.margin);
            if (!vd.invariant) {
                rep.violations++;
                if (slot->details.size() < 4)
                    slot->details.push_back({0, rep.steps_checked, vd.tag, vd.margin, 0, 0});
            }
            if (vd.invariant && !vd.strict) rep.nonstrict_counts[t]++;
            if (vd.strict && rep.first_strict < 0) rep.first_strict = rep.steps_checked;
            if (vd.touched_infinity) rep.infinity_touches++;
            if (vd.tag == CaseTag::IV_2_1) {
                iv21_run++;
                rep.max_iv21_run = std::max(rep.max_iv21_run, iv21_run);
            } else {
                iv21_run = 0;
            }
        }
        if (do_lyap) {
            JacobianStep J = jacobian_step(table, rec);
            TangentVector w = J.apply(v);
            double g = std::hypot(w.ds, w.dalpha);
            v = {w.ds / g, w.dalpha / g};
            if (step > burn) {
                double y = std::log(g) - comp;
                double t2 = sum + y;
                comp = (t2 - sum) - y;
                sum = t2;
                accumulated++;
                if (accumulated == half) sum_half = sum;
            }
        }
        x = rec.end;
        ctx = ctx_out;
        if (do_cones) cone = assign_cone(ctx, x.alpha, table.curvature_at(x.bp));
        if (!do_lyap && step >= n_steps) break;
    }
    rep.completed = true;
    slot->lyap.n_eff = accumulated;
    if (accumulated > 0) slot->lyap.lambda = sum / accumulated;
    if (half > 0 && accumulated >= half) slot->lyap.lambda_half = sum_half / half;
}

void draw_and_walk(const Table& table, const SurveyConfig& cfg, bool do_cones, bool do_lyap,
                   const LyapunovOptions& lyap_opt, std::uint64_t orbit_id, OrbitSlot* slot) {
    std::mt19937_64 rng = orbit_rng(cfg.seed, orbit_id);
    SampleDomain dom = (do_lyap && lyap_opt.full_boundary_section)
                           ? SampleDomain::full_boundary
                           : SampleDomain::section;
    PhasePoint x0 = sample_mu(rng, table, dom);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double theta = 2 * 3.14159265358979323846 * uni(rng);
    TangentVector v0{std::cos(theta), std::sin(theta)};
    slot->s0 = table.global_s(x0.bp);
    slot->alpha0 = x0.alpha;
    slot->orbit_seed = splitmix64(cfg.seed ^ splitmix64(orbit_id));
    slot->drawn = true;
    walk_orbit(table, x0, cfg.n_steps, cfg.dyn, cfg.cone_tol, do_cones, do_lyap, v0, lyap_opt,
               slot);
}

// deterministic batched resampling: batch k covers a contiguous id range, so
// results do not depend on the thread schedule
template <typename OnOrbit>
void run_batches(const Table& table, const SurveyConfig& cfg, bool do_cones, bool do_lyap,
                 const LyapunovOptions& lyap_opt, long long* total_draws, OnOrbit&& on_orbit) {
    long long target = cfg.n_orbits;
    long long completed = 0;
    std::uint64_t next_id = 0;
    for (int round = 0; round < cfg.max_resample_rounds && completed < target; ++round) {
        long long batch = target - completed;
        std::vector<OrbitSlot> slots(static_cast<size_t>(batch));
#pragma omp parallel for schedule(dynamic, 4) if (cfg.parallel)
        for (long long i = 0; i < batch; ++i)
            draw_and_walk(table, cfg, do_cones, do_lyap, lyap_opt, next_id + i, &slots[i]);
        for (long long i = 0; i < batch; ++i) {
            bool ok = on_orbit(next_id + i, slots[i]);
            if (ok) completed++;
        }
        next_id += batch;
    }
    *total_draws = static_cast<long long>(next_id);
}

}  // namespace

ConeSurveyReport run_cone_survey(const Table& table, const SurveyConfig& cfg) {
    ConeSurveyReport rep;
    rep.seed = cfg.seed;
    rep.n_orbits = cfg.n_orbits;
    rep.n_steps = cfg.n_steps;
    rep.case_min_margin.fill(1e300);
    LyapunovOptions no_lyap;
    run_batches(table, cfg, /*cones=*/true, /*lyap=*/false, no_lyap, &rep.total_draws,
                [&](std::uint64_t id, const OrbitSlot& slot) {
                    const OrbitReport& o = slot.cones;
                    if (!o.completed) {
                        if (o.singular_kind == SingularEvent::corner_hit) rep.singular_corner++;
                        if (o.singular_kind == SingularEvent::tangential_hit)
                            rep.singular_tangential++;
                        if (o.singular_kind == SingularEvent::cap_exceeded) rep.singular_cap++;
                        return false;
                    }
                    rep.completed++;
                    rep.violations_total += o.violations;
                    for (const Violation& v : slot.details) {
                        if (rep.violations.size() >= 100) break;
                        Violation w = v;
                        w.orbit_id = id;
                        w.s0 = slot.s0;
                        w.alpha0 = slot.alpha0;
                        rep.violations.push_back(w);
                    }
                    for (int t = 0; t < kCaseCount; ++t) {
                        rep.case_counts[t] += o.case_counts[t];
                        rep.nonstrict_counts[t] += o.nonstrict_counts[t];
                        rep.case_min_margin[t] =
                            std::min(rep.case_min_margin[t], o.case_min_margin[t]);
                    }
                    rep.min_margin = std::min(rep.min_margin, o.min_margin);
                    rep.infinity_touches += o.infinity_touches;
                    rep.max_iv21_run = std::max(rep.max_iv21_run, o.max_iv21_run);
                    rep.per_orbit_min_margin.push_back(o.min_margin);
                    rep.per_orbit_first_strict.push_back(o.first_strict);
                    if (o.first_strict < 0) rep.orbits_without_strict++;
                    return true;
                });
    return rep;
}

LyapunovSurveyReport run_lyapunov_survey(const Table& table, const LyapunovSurveyConfig& cfg) {
    LyapunovSurveyReport rep;
    rep.seed = cfg.seed;
    rep.n_orbits = cfg.n_orbits;
    rep.n_steps = cfg.n_steps;
    rep.reversed = cfg.lyap.reversed;
    int min_eff = std::min(1000, cfg.n_steps);
    std::vector<double> lambdas, halves;
    run_batches(table, cfg, cfg.check_cones, /*lyap=*/true, cfg.lyap, &rep.total_draws,
                [&](std::uint64_t, const OrbitSlot& slot) {
                    const LyapunovOrbitResult& r = slot.lyap;
                    if (r.truncated && r.n_eff < min_eff) {
                        rep.excluded_short++;
                        return false;
                    }
                    rep.completed++;
                    rep.cone_violations += slot.cones.violations;
                    lambdas.push_back(r.lambda);
                    if (r.n_eff >= cfg.n_steps / 2 && cfg.n_steps / 2 > 0)
                        halves.push_back(r.lambda_half);
                    rep.rows.push_back(
                        {slot.orbit_seed, slot.s0, slot.alpha0, r.n_eff, r.lambda});
                    return true;
                });
    if (!lambdas.empty()) {
        double m = 0;
        for (double v : lambdas) m += v;
        m /= lambdas.size();
        double var = 0;
        for (double v : lambdas) var += (v - m) * (v - m);
        var = lambdas.size() > 1 ? var / (lambdas.size() - 1) : 0.0;
        rep.lambda_mean = m;
        rep.stderr_stat = std::sqrt(var / lambdas.size());
    }
    if (!halves.empty()) {
        double m = 0;
        for (double v : halves) m += v;
        rep.lambda_half_mean = m / halves.size();
        rep.convergence_gap = std::abs(rep.lambda_mean - rep.lambda_half_mean);
    }
    rep.stderr_total = rep.stderr_stat + rep.convergence_gap;
    return rep;
}

double c1_grid_min_margin(const Table& table, int grid_d, int grid_f, bool parallel) {
    C1Options opt;
    opt.grid_d = grid_d;
    opt.grid_f = grid_f;
    opt.refine_rounds = 0;
    opt.parallel = parallel;
    return check_C1(table, opt).margin;
}

}  // namespace hypb
