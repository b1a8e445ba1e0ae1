// Timing comparison of the serial reference kernels against the OpenMP ones.
#include <omp.h>

#include <chrono>
#include <cstdio>

#include "hypb/spiral.hpp"
#include "hypb/survey.hpp"

using namespace hypb;

namespace {

template <typename F>
double time_of(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    double k_f = argc > 1 ? std::atof(argv[1]) : 0.05;
    long long orbits = argc > 2 ? std::atoll(argv[2]) : 400;
    int steps = argc > 3 ? std::atoi(argv[3]) : 300;

    std::printf("building optimal table (k_f = %g)...\n", k_f);
    C1Options c1;
    c1.grid_d = 200;
    c1.grid_f = 200;
    auto [table, cert] = build_optimal_table(-1.0, k_f, c1);
    std::printf("h = %g, area = %g, threads = %d\n", cert.h, cert.area, omp_get_max_threads());

    SurveyConfig cfg;
    cfg.seed = 7;
    cfg.n_orbits = orbits;
    cfg.n_steps = steps;

    std::printf("%-28s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");

    ConeSurveyReport r1, r2;
    cfg.parallel = false;
    double ts = time_of([&] { r1 = run_cone_survey(table, cfg); });
    cfg.parallel = true;
    double tp = time_of([&] { r2 = run_cone_survey(table, cfg); });
    bool same = r1.min_margin == r2.min_margin && r1.completed == r2.completed;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "cone survey", ts, tp, ts / tp,
                same ? "(identical)" : "(MISMATCH)");

    LyapunovSurveyConfig lc;
    lc.seed = 7;
    lc.n_orbits = orbits;
    lc.n_steps = steps;
    LyapunovSurveyReport l1, l2;
    lc.parallel = false;
    ts = time_of([&] { l1 = run_lyapunov_survey(table, lc); });
    lc.parallel = true;
    tp = time_of([&] { l2 = run_lyapunov_survey(table, lc); });
    same = l1.lambda_mean == l2.lambda_mean;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "lyapunov survey", ts, tp, ts / tp,
                same ? "(identical)" : "(MISMATCH)");

    double m1 = 0, m2 = 0;
    ts = time_of([&] { m1 = c1_grid_min_margin(table, 400, 400, false); });
    tp = time_of([&] { m2 = c1_grid_min_margin(table, 400, 400, true); });
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "containment grid 400x400", ts, tp, ts / tp,
                m1 == m2 ? "(identical)" : "(MISMATCH)");
    return 0;
}
