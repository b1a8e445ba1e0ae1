#include "hypb/spiral.hpp"

#include <algorithm>
#include <cmath>

namespace hypb {

namespace {
constexpr double kPi = 3.14159265358979323846;

Piece seg_piece(Point2 a, Point2 b) {
    Piece p;
    p.shape = SegmentPiece{a, b};
    p.label = Label::flat;
    return p;
}

// One corridor: chain of right trapezoids. Trapezoid i has entry leg
// [inner[i-1], outer[i-1]], shorter base along u_i on the inner bank,
// exit leg [inner[i], outer[i]].
SpiralInfo emit_corridor(Point2 start_inner, double start_dir,
                         const std::vector<double>& lengths,
                         const std::vector<double>& gammas, double h1) {
    SpiralInfo sp;
    size_t n = lengths.size();
    sp.lengths = lengths;
    sp.gammas = gammas;
    sp.inner.reserve(n + 1);
    sp.outer.reserve(n + 1);
    sp.heights.reserve(n + 1);
    Point2 in = start_inner;
    double ang = start_dir;
    double h = h1;
    for (size_t i = 0; i <= n; ++i) {
        Vec2 u = dir_of(ang);
        Vec2 nrm = u.perp();
        sp.inner.push_back(in);
        sp.outer.push_back(in - h * nrm);
        sp.heights.push_back(h);
        if (i == n) break;
        if (lengths[i] <= 0) throw GeometryError("nonpositive trapezoid base");
        if (!(gammas[i] > 0 && gammas[i] < kPi / 2))
            throw GeometryError("trapezoid angle outside (0, pi/2)");
        in = in + lengths[i] * u;
        ang += gammas[i];
        h /= std::cos(gammas[i]);
    }
    return sp;
}

void append_corridor_pieces(std::vector<Piece>& ps, SpiralInfo& sp) {
    sp.first_piece = static_cast<int>(ps.size());
    size_t n = sp.lengths.size();
    for (size_t i = 0; i < n; ++i) ps.push_back(seg_piece(sp.outer[i], sp.outer[i + 1]));
    ps.push_back(seg_piece(sp.outer[n], sp.inner[n]));  // sealed end
    for (size_t i = n; i-- > 0;) ps.push_back(seg_piece(sp.inner[i + 1], sp.inner[i]));
}

}  // namespace

double wrap_factor(long long n_bar) {
    if (n_bar < 5) throw GeometryError("wrap_factor needs n >= 5");
    double g = 2 * kPi / static_cast<double>(n_bar);
    return std::expm1(-static_cast<double>(n_bar) * std::log(std::cos(g)));
}

SpiralBuildResult build_spiral_table(double k_d, double k_f, const SpiralParams& partial,
                                     const C1Options& c1_opt, double h_o_hint) {
    if (!(k_d > -std::sqrt(2.0) && k_d < 0)) throw GeometryError("k_d must lie in (-sqrt(2),0)");
    if (!(k_f > 0 && k_f < 1)) throw GeometryError("k_f must lie in (0, 1)");

    SpiralParams prm = partial;
    if (prm.m_right <= 0) prm.m_right = 4;
    if (prm.m_left <= 0) prm.m_left = 12;
    if (prm.prefix_gamma_den <= 0) {
        prm.prefix_gamma_num = 1;
        prm.prefix_gamma_den = 8;
    }
    if (prm.gap_fraction <= 0 || prm.gap_fraction >= 0.5) prm.gap_fraction = 0.15;
    double gp = kPi * prm.prefix_gamma_num / prm.prefix_gamma_den;
    // the prefixes must turn the corridors from their mouth headings (east /
    // west) to the regular-phase headings (north at the joining ray for both)
    if (std::abs(prm.m_right * gp - kPi / 2) > 1e-12)
        throw GeometryError("right prefix must turn by pi/2 in total");
    if (std::abs(prm.m_left * gp - 3 * kPi / 2) > 1e-12)
        throw GeometryError("left prefix must turn by 3 pi/2 in total");
    // the closed-form routing below fixes one length per prefix corner
    if (prm.m_right != 4 || prm.m_left != 12)
        throw GeometryError("prefix routing recipe covers m_right = 4, m_left = 12");

    double sec = 1.0 / std::cos(gp);
    double c_right = std::pow(sec, prm.m_right);
    double c_left = std::pow(sec, prm.m_left);
    prm.k4 = c_right + c_left;
    double eta = prm.gap_fraction;

    double h_o = h_o_hint > 0 ? h_o_hint : compute_h_o(k_d, k_f, c1_opt);
    double l_o = 1.0 / k_f;

    std::vector<double> r0_grid = prm.r0 > 0 ? std::vector<double>{prm.r0}
                                             : std::vector<double>{3, 4, 5, 6};
    std::string last_err;
    for (double r0 : r0_grid) {
        prm.r0 = r0;
        prm.center = {0.5, 1.5};
        const Point2 A = prm.center;

        // smallest corner count for which the mouth height drops below 2 h_o;
        // the step ratio of wrap_factor keeps it above h_o
        auto h_of = [&](long long n) {
            return (1 - 2 * eta) * r0 / prm.k4 * wrap_factor(n);
        };
        long long lo = 8, hi = 16;
        while (h_of(hi) > 2 * h_o) hi *= 2;
        while (hi - lo > 1) {
            long long mid = (lo + hi) / 2;
            if (h_of(mid) <= 2 * h_o)
                hi = mid;
            else
                lo = mid;
        }
        long long n_bar = hi;
        double h = h_of(n_bar);
        if (h < h_o * (1 - 1e-12))
            throw NoSolutionError("no corner count lands the mouth height in [h_o, 2 h_o]");
        double gbar = 2 * kPi / static_cast<double>(n_bar);
        double w0 = r0 * wrap_factor(n_bar);
        double t_gap = eta * w0;
        long long rounds = static_cast<long long>(std::floor(l_o / (2 * kPi * r0))) + 1;

        prm.n_bar = static_cast<int>(n_bar);
        prm.rounds = static_cast<int>(rounds);
        prm.w0 = w0;
        prm.h = h;

        // --- right corridor ---------------------------------------------
        // prefix inner path from the mouth corner (1, h) to the joining
        // corner A + (r0, 0); lengths l2 = l4 = 0.2, l3 and l1 solved
        Point2 S_R{1, h};
        Point2 J_R = A + Vec2{r0, 0};
        Vec2 dR = J_R - S_R;
        double l2r = 0.2, l4r = 0.2;
        double l3r = (dR.y - l2r * std::sin(gp) - l4r * std::sin(3 * gp)) / std::sin(2 * gp);
        double l1r = dR.x - l2r * std::cos(gp) - l3r * std::cos(2 * gp) - l4r * std::cos(3 * gp);
        if (l3r <= 1e-3 || l1r <= 1e-3) {
            last_err = "right prefix closure failed";
            continue;
        }
        std::vector<double> len_r{l1r, l2r, l3r, l4r};
        std::vector<double> gam_r(prm.m_right, gp);
        {
            double a = r0;  // inner corner radius on the ray fan
            for (long long j = 0; j < rounds * n_bar; ++j) {
                len_r.push_back(a * std::tan(gbar));
                gam_r.push_back(gbar);
                a /= std::cos(gbar);
            }
        }
        SpiralInfo right = emit_corridor(S_R, 0.0, len_r, gam_r, h);

        // --- left corridor ----------------------------------------------
        // swings under the bulk and climbs into its slot just outside the
        // right corridor; the final climb leg is parallel to the right
        // prefix's last leg at radial clearance t_gap
        double rho_l = r0 + c_right * h + t_gap;
        Point2 S_L{0, 0};
        Point2 J_L = A + Vec2{rho_l, 0};
        double l1l = 0.6, eps_d = 0.05, eps_c = 0.1, dip = 0.35;
        double diag = std::sin(gp) + std::sin(2 * gp) + std::sin(3 * gp);
        double l5l = dip - eps_d * 2 * diag;  // reaches depth `dip` below the mouth
        if (l5l <= 1e-3) {
            last_err = "left prefix dip too shallow";
            continue;
        }
        double l12l = (J_L.y - S_L.y + dip - eps_c * (std::sin(gp) + std::sin(2 * gp))) /
                      std::sin(3 * gp);
        double x_fixed = -l1l - eps_d * (std::cos(gp) + std::cos(2 * gp) + std::cos(3 * gp)) +
                         eps_d * (std::cos(3 * gp) + std::cos(2 * gp) + std::cos(gp)) +
                         eps_c * (std::cos(gp) + std::cos(2 * gp)) + l12l * std::cos(3 * gp);
        double l9l = (J_L.x - S_L.x) - x_fixed;
        if (l9l <= 1e-3 || l12l <= 1e-3) {
            last_err = "left prefix closure failed";
            continue;
        }
        std::vector<double> len_l{l1l, eps_d, eps_d, eps_d, l5l, eps_d,
                                  eps_d, eps_d, l9l, eps_c, eps_c, l12l};
        std::vector<double> gam_l(prm.m_left, gp);
        {
            double a = rho_l;
            for (long long j = 0; j < rounds * n_bar; ++j) {
                len_l.push_back(a * std::tan(gbar));
                gam_l.push_back(gbar);
                a /= std::cos(gbar);
            }
        }
        SpiralInfo left = emit_corridor(S_L, kPi, len_l, gam_l, h);

        // --- assemble the table -----------------------------------------
        double rf = 1.0 / k_f;
        double rd = 1.0 / -k_d;
        Point2 Bpt{1, 0}, Cpt{1, 1}, Dpt{0, 1};
        Point2 mouthR{1, h}, mouthL{0, h};
        std::vector<Piece> ps;
        ps.push_back(make_arc_piece({0, 0}, Bpt, rf, false, Label::focusing));
        append_corridor_pieces(ps, right);
        ps.push_back(make_arc_piece(mouthR, Cpt, rd, true, Label::dispersing));
        ps.push_back(make_arc_piece(Cpt, Dpt, rd, true, Label::dispersing));
        ps.push_back(make_arc_piece(Dpt, mouthL, rd, true, Label::dispersing));
        append_corridor_pieces(ps, left);

        Table table;
        try {
            table = finish_table(std::move(ps), "spiral");
            table.k_f = k_f;
            table.k_d = k_d;
            table.spirals.push_back(std::move(right));
            table.spirals.push_back(std::move(left));
            validate_no_self_intersections(table);
        } catch (const GeometryError& e) {
            last_err = e.what();
            continue;
        }

        // --- certificate --------------------------------------------------
        GeometryCertificate cert;
        cert.c1 = check_C1(table, c1_opt);
        cert.is_spiral = true;
        cert.h = h;
        double k1 = 0, k3 = 0;
        double sums[2] = {0, 0};
        for (int sidx = 0; sidx < 2; ++sidx) {
            const SpiralInfo& sp = table.spirals[sidx];
            int n = sp.trapezoid_count();
            for (int i = 0; i < n; ++i) {
                sums[sidx] += sp.lengths[i];
                k3 = std::max(k3, sp.heights[i] * std::tan(sp.gammas[i]) / sp.lengths[i]);
            }
            k1 = std::max(k1, sp.heights[n - 1] / h_o);
        }
        cert.sum_l_right = sums[0];
        cert.sum_l_left = sums[1];
        cert.k1_measured = k1;
        cert.k2_measured = std::max(sums[0], sums[1]) / l_o;
        cert.k3_measured = k3;
        cert.c2_ok = sums[0] >= l_o && sums[1] >= l_o;
        cert.c2_margin = std::min(sums[0], sums[1]) - l_o;
        cert.l = std::min(sums[0], sums[1]);
        cert.area = table_area(table);
        cert.diameter = table_diameter(table);
        cert.spiral_ok = cert.c2_ok && h >= h_o * (1 - 1e-12) && h <= 2 * h_o * (1 + 1e-12);

        SpiralBuildResult out{std::move(table), prm, cert};
        return out;
    }
    throw NoSolutionError("no spiral table for any r0 in the grid: " + last_err);
}

}  // namespace hypb
