#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypb/dynamics.hpp"
#include "hypb/io.hpp"
#include "hypb/spiral.hpp"
#include "hypb/survey.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

struct RunConfig {
    std::string family = "optimal";
    double k_d = -1.0;
    double k_f = 0.01;
    double h = 0.0;  // 0 = derived (h_o)
    double l = 0.0;  // 0 = derived (1/k_f)
    double r0 = 0.0; // 0 = auto grid
    std::uint64_t seed = 1;
    long long orbits = 10000;
    int steps = 1000;
    int threads = 0;
    std::string out_dir = ".";
    double corner_tol = 1e-9, tangential_tol = 1e-9, t_min = 1e-9;
    long long flat_cap = 10000000;
    bool serial = false;
    bool expect_positive = false;
    std::vector<double> kf_list;
    int grid = 400;
};

std::string canonical_config_json(const RunConfig& c, const std::string& command) {
    std::ostringstream ss;
    ss << "{\"command\":\"" << command << "\",\"family\":\"" << c.family << "\""
       << ",\"k_d\":" << hypb::io::fmt_g17(c.k_d) << ",\"k_f\":" << hypb::io::fmt_g17(c.k_f)
       << ",\"h\":" << hypb::io::fmt_g17(c.h) << ",\"l\":" << hypb::io::fmt_g17(c.l)
       << ",\"r0\":" << hypb::io::fmt_g17(c.r0) << ",\"seed\":" << c.seed
       << ",\"orbits\":" << c.orbits << ",\"steps\":" << c.steps
       << ",\"corner_tol\":" << hypb::io::fmt_g17(c.corner_tol)
       << ",\"tangential_tol\":" << hypb::io::fmt_g17(c.tangential_tol)
       << ",\"t_min\":" << hypb::io::fmt_g17(c.t_min) << ",\"flat_cap\":" << c.flat_cap
       << ",\"grid\":" << c.grid << ",\"kf_list\":[";
    for (size_t i = 0; i < c.kf_list.size(); ++i) {
        if (i) ss << ",";
        ss << hypb::io::fmt_g17(c.kf_list[i]);
    }
    ss << "]}";
    return ss.str();
}

// timestamps and the resolved run configuration (tolerances included) live
// in this sidecar so the primary artifacts stay byte-reproducible
void write_sidecar(const RunConfig& c, const std::string& command) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    std::string meta = "{\"command\":\"" + command +
                       "\",\"unix_time\":" + std::to_string(secs) +
                       ",\"config\":" + canonical_config_json(c, command) + "}\n";
    hypb::io::write_file_atomic(c.out_dir + "/run_meta.json", meta);
}

struct BuiltTable {
    hypb::Table table;
    hypb::GeometryCertificate cert;
    hypb::SpiralParams spiral;
    bool has_spiral = false;
    double h_o = 0.0;
};

BuiltTable build_from_config(const RunConfig& c) {
    BuiltTable out;
    hypb::C1Options c1;
    c1.grid_d = c.grid;
    c1.grid_f = c.grid;
    c1.parallel = !c.serial;
    if (c.family == "optimal") {
        out.h_o = hypb::compute_h_o(c.k_d, c.k_f, c1);
        hypb::MainTableParams p{c.k_d, c.k_f, out.h_o, c.l > 0 ? c.l : 1.0 / c.k_f};
        out.table = hypb::build_main_table(p);
        out.table.family = "optimal";
        out.cert = hypb::make_certificate(out.table, p, c1);
    } else if (c.family == "main") {
        out.h_o = hypb::compute_h_o(c.k_d, c.k_f, c1);
        hypb::MainTableParams p{c.k_d, c.k_f, c.h > 0 ? c.h : out.h_o,
                                c.l > 0 ? c.l : 1.0 / c.k_f};
        out.table = hypb::build_main_table(p);
        out.cert = hypb::make_certificate(out.table, p, c1);
    } else if (c.family == "spiral") {
        hypb::SpiralParams partial;
        partial.r0 = c.r0;
        out.h_o = hypb::compute_h_o(c.k_d, c.k_f, c1);
        auto res = hypb::build_spiral_table(c.k_d, c.k_f, partial, c1, out.h_o);
        out.table = std::move(res.table);
        out.cert = res.certificate;
        out.spiral = res.params;
        out.has_spiral = true;
    } else if (c.family == "bulk") {
        out.table = hypb::build_bulk_table(c.k_d, c.k_f);
    } else if (c.family == "square") {
        out.table = hypb::build_square_table();
    } else {
        throw std::runtime_error("unknown family: " + c.family);
    }
    return out;
}

hypb::DynOptions dyn_of(const RunConfig& c) {
    hypb::DynOptions d;
    d.corner_tol = c.corner_tol;
    d.tangential_tol = c.tangential_tol;
    d.t_min = c.t_min;
    d.flat_cap = c.flat_cap;
    return d;
}

int cmd_build(const RunConfig& c) {
    BuiltTable b = build_from_config(c);
    std::string cfg_hash = hypb::io::git_blob_hash(canonical_config_json(c, "build"));
    std::string tj = hypb::io::table_to_json(b.table);
    hypb::io::write_file_atomic(c.out_dir + "/table.json", tj);
    hypb::io::write_file_atomic(c.out_dir + "/table.svg", hypb::io::table_to_svg(b.table));
    hypb::io::write_file_atomic(
        c.out_dir + "/certificate.json",
        hypb::io::certificate_to_json(b.cert, b.table, b.has_spiral ? &b.spiral : nullptr,
                                      b.h_o, cfg_hash, hypb::io::git_blob_hash(tj)));
    write_sidecar(c, "build");
    std::cout << "table_hash " << hypb::io::git_blob_hash(tj) << "\n";
    if (c.family == "bulk" || c.family == "square") return 0;
    if (!b.cert.passed()) {
        std::cerr << "certificate failed (margin " << b.cert.c1.margin << ")\n";
        return 2;
    }
    return 0;
}

int cmd_verify_cones(const RunConfig& c) {
    BuiltTable b = build_from_config(c);
    std::string cfg_hash = hypb::io::git_blob_hash(canonical_config_json(c, "verify-cones"));
    std::string table_hash = hypb::io::git_blob_hash(hypb::io::table_to_json(b.table));
    hypb::SurveyConfig sc;
    sc.seed = c.seed;
    sc.n_orbits = c.orbits;
    sc.n_steps = c.steps;
    sc.parallel = !c.serial;
    sc.dyn = dyn_of(c);
    hypb::ConeSurveyReport rep = hypb::run_cone_survey(b.table, sc);
    hypb::io::write_file_atomic(c.out_dir + "/survey.json",
                                hypb::io::cone_report_to_json(rep, table_hash, cfg_hash));
    write_sidecar(c, "verify-cones");
    std::cout << "completed " << rep.completed << "/" << rep.n_orbits << ", violations "
              << rep.violations_total << ", min margin " << rep.min_margin << "\n";
    if (rep.violations_total > 0) return 3;
    long long singular = rep.singular_corner + rep.singular_tangential + rep.singular_cap;
    if (rep.singular_cap > 0 || singular > rep.total_draws / 1000) return 4;
    return 0;
}

int cmd_lyapunov(const RunConfig& c) {
    BuiltTable b = build_from_config(c);
    std::string cfg_hash = hypb::io::git_blob_hash(canonical_config_json(c, "lyapunov"));
    std::string table_hash = hypb::io::git_blob_hash(hypb::io::table_to_json(b.table));
    hypb::LyapunovSurveyConfig sc;
    sc.seed = c.seed;
    sc.n_orbits = c.orbits;
    sc.n_steps = c.steps;
    sc.parallel = !c.serial;
    sc.dyn = dyn_of(c);
    sc.lyap.full_boundary_section = b.table.section_pieces.empty();
    sc.check_cones = !sc.lyap.full_boundary_section && c.family != "bulk";
    hypb::LyapunovSurveyReport rep = hypb::run_lyapunov_survey(b.table, sc);
    hypb::io::write_file_atomic(c.out_dir + "/lyapunov.json",
                                hypb::io::lyapunov_report_to_json(rep, table_hash, cfg_hash));
    hypb::io::write_file_atomic(c.out_dir + "/lyapunov.csv",
                                hypb::io::lyapunov_rows_csv(rep, table_hash, cfg_hash));
    write_sidecar(c, "lyapunov");
    std::cout << "lambda " << rep.lambda_mean << " +- " << rep.stderr_total << "\n";
    if (c.expect_positive && rep.lambda_mean - 2.576 * rep.stderr_total <= 0) return 1;
    return 0;
}

int cmd_scaling_study(const RunConfig& c) {
    RunConfig cc = c;
    if (cc.kf_list.empty()) cc.kf_list = {1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3};
    std::sort(cc.kf_list.rbegin(), cc.kf_list.rend());  // decreasing; r0 frozen at the largest
    std::string cfg_hash = hypb::io::git_blob_hash(canonical_config_json(cc, "scaling-study"));
    hypb::C1Options c1;
    c1.grid_d = cc.grid;
    c1.grid_f = cc.grid;
    c1.parallel = !cc.serial;
    std::vector<hypb::io::StudyRow> rows;
    double r0_frozen = cc.r0;
    for (double kf : cc.kf_list) {
        hypb::io::StudyRow row{};
        row.k_f = kf;
        double h_o = hypb::compute_h_o(cc.k_d, kf, c1);
        row.h_o = h_o;
        hypb::MainTableParams p{cc.k_d, kf, h_o, 1.0 / kf};
        hypb::Table opt = hypb::build_main_table(p);
        row.area_opt = hypb::table_area(opt);
        row.diam_opt = hypb::table_diameter(opt);
        hypb::SpiralParams partial;
        partial.r0 = r0_frozen;
        auto res = hypb::build_spiral_table(cc.k_d, kf, partial, c1, h_o);
        if (r0_frozen <= 0) r0_frozen = res.params.r0;  // freeze at the largest k_f
        row.area_spiral = res.certificate.area;
        row.diam_spiral = res.certificate.diameter;
        row.k1 = res.certificate.k1_measured;
        row.k2 = res.certificate.k2_measured;
        row.k3 = res.certificate.k3_measured;
        row.n_bar = res.params.n_bar;
        row.rounds = res.params.rounds;
        rows.push_back(row);
        std::cout << "k_f " << kf << ": h_o " << h_o << ", N_bar " << row.n_bar << ", M "
                  << row.rounds << "\n";
    }
    hypb::io::write_file_atomic(cc.out_dir + "/study.csv", hypb::io::study_csv(rows, cfg_hash));
    hypb::io::write_file_atomic(cc.out_dir + "/study_plots.svg", hypb::io::study_plots_svg(rows));
    write_sidecar(cc, "scaling-study");
    return 0;
}

int cmd_export_svg(const RunConfig& c) {
    BuiltTable b = build_from_config(c);
    hypb::io::write_file_atomic(c.out_dir + "/table.svg", hypb::io::table_to_svg(b.table));
    write_sidecar(c, "export-svg");
    return 0;
}

int cmd_orbit_dump(const RunConfig& c) {
    BuiltTable b = build_from_config(c);
    std::string cfg_hash = hypb::io::git_blob_hash(canonical_config_json(c, "orbit-dump"));
    std::string table_hash = hypb::io::git_blob_hash(hypb::io::table_to_json(b.table));
    auto rng = hypb::orbit_rng(c.seed, 0);
    hypb::PhasePoint x = hypb::sample_mu(rng, b.table,
                                         b.table.section_pieces.empty()
                                             ? hypb::SampleDomain::full_boundary
                                             : hypb::SampleDomain::section);
    std::ostringstream csv;
    csv << "# table_hash=" << table_hash << " config_hash=" << cfg_hash << "\n";
    csv << "step,s,alpha,tau,piece_label,n_flat_hits\n";
    std::vector<hypb::Point2> pts;
    hypb::DynOptions dyn = dyn_of(c);
    pts.push_back(b.table.point_at(x.bp));
    for (int step = 0; step < c.steps; ++step) {
        auto fr = hypb::first_return_map(b.table, x, dyn);
        if (std::holds_alternative<hypb::SingularEvent>(fr)) {
            csv << step << ",singular,,,,\n";
            break;
        }
        auto rec = std::get<hypb::FlightRecord>(fr);
        x = rec.end;
        pts.push_back(b.table.point_at(x.bp));
        csv << step << "," << hypb::io::fmt_g17(b.table.global_s(x.bp)) << ","
            << hypb::io::fmt_g17(x.alpha) << "," << hypb::io::fmt_g17(rec.tau) << ","
            << hypb::label_name(b.table.pieces[x.bp.piece].label) << "," << rec.n_flat_hits
            << "\n";
    }
    hypb::io::write_file_atomic(c.out_dir + "/orbit.csv", csv.str());
    hypb::io::write_file_atomic(c.out_dir + "/orbit.svg",
                                hypb::io::trajectory_svg(b.table, pts));
    write_sidecar(c, "orbit-dump");
    return 0;
}

void apply_config_file(CLI::App& app, RunConfig& c, const std::string& path) {
    json j = json::parse(hypb::io::read_file(path));
    auto set_if_default = [&](const char* flag, auto& field) {
        using T = std::decay_t<decltype(field)>;
        auto* opt = app.get_option_no_throw(flag);
        std::string key = flag + 2;  // strip "--"
        std::replace(key.begin(), key.end(), '-', '_');
        if (j.contains(key) && (!opt || opt->count() == 0)) field = j[key].get<T>();
    };
    set_if_default("--family", c.family);
    set_if_default("--kd", c.k_d);
    set_if_default("--kf", c.k_f);
    set_if_default("--h", c.h);
    set_if_default("--l", c.l);
    set_if_default("--r0", c.r0);
    set_if_default("--seed", c.seed);
    set_if_default("--orbits", c.orbits);
    set_if_default("--steps", c.steps);
    set_if_default("--threads", c.threads);
    set_if_default("--out", c.out_dir);
    set_if_default("--corner-tol", c.corner_tol);
    set_if_default("--tangential-tol", c.tangential_tol);
    set_if_default("--t-min", c.t_min);
    set_if_default("--flat-cap", c.flat_cap);
    set_if_default("--grid", c.grid);
    if (j.contains("kf_list") &&
        (!app.get_option_no_throw("--kf-list") ||
         app.get_option_no_throw("--kf-list")->count() == 0))
        c.kf_list = j["kf_list"].get<std::vector<double>>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nearly-flat focusing billiard workbench"};
    app.require_subcommand(1);

    RunConfig c;
    std::string config_path;

    auto add_common = [&](CLI::App* s) {
        s->set_help_flag("--help", "print help");  // keep --h free for the strip height
        s->add_option("--config", config_path, "JSON config file (flags win)");
        s->add_option("--family", c.family, "table family: main|optimal|spiral|bulk|square");
        s->add_option("--kd", c.k_d, "dispersing curvature, in (-sqrt(2),0)");
        s->add_option("--kf", c.k_f, "focusing curvature, > 0");
        s->add_option("--h", c.h, "strip height (main family; 0 = h_o)");
        s->add_option("--l", c.l, "strip length (main family; 0 = 1/k_f)");
        s->add_option("--r0", c.r0, "double-spiral initial ray (0 = auto)");
        s->add_option("--seed", c.seed, "root seed");
        s->add_option("--orbits", c.orbits, "number of orbits");
        s->add_option("--steps", c.steps, "return steps per orbit");
        s->add_option("--threads", c.threads, "worker threads (default HYPB_THREADS)");
        s->add_option("--out", c.out_dir, "output directory");
        s->add_option("--corner-tol", c.corner_tol, "corner tolerance");
        s->add_option("--tangential-tol", c.tangential_tol, "tangential tolerance");
        s->add_option("--t-min", c.t_min, "minimum ray advance");
        s->add_option("--flat-cap", c.flat_cap, "flat bounce cap");
        s->add_option("--grid", c.grid, "containment-check grid resolution");
        s->add_flag("--serial", c.serial, "use the serial reference kernels");
    };

    CLI::App* b = app.add_subcommand("build", "build and certify a table");
    add_common(b);
    CLI::App* vc = app.add_subcommand("verify-cones", "cone-invariance survey");
    add_common(vc);
    CLI::App* ly = app.add_subcommand("lyapunov", "Lyapunov exponent survey");
    add_common(ly);
    ly->add_flag("--expect-positive", c.expect_positive,
                 "exit nonzero unless the CI excludes 0");
    CLI::App* st = app.add_subcommand("scaling-study", "k_f scaling study");
    add_common(st);
    st->add_option("--kf-list", c.kf_list, "decreasing list of k_f values")->delimiter(',');
    CLI::App* ex = app.add_subcommand("export-svg", "write the table outline SVG");
    add_common(ex);
    CLI::App* od = app.add_subcommand("orbit-dump", "dump one orbit as CSV + SVG");
    add_common(od);

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    try {
        if (!config_path.empty()) apply_config_file(*sub, c, config_path);
        int threads = c.threads;
        if (threads <= 0) {
            if (const char* env = std::getenv("HYPB_THREADS")) threads = std::atoi(env);
        }
        if (threads > 0) omp_set_num_threads(threads);

        if (sub == b) return cmd_build(c);
        if (sub == vc) return cmd_verify_cones(c);
        if (sub == ly) return cmd_lyapunov(c);
        if (sub == st) return cmd_scaling_study(c);
        if (sub == ex) return cmd_export_svg(c);
        if (sub == od) return cmd_orbit_dump(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
