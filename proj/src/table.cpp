#include "hypb/table.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <memory>

namespace hypb {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kChainTol = 1e-10;

struct BBox {
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    void add(Point2 p) {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    bool overlaps(const BBox& o, double pad) const {
        return xmin <= o.xmax + pad && o.xmin <= xmax + pad && ymin <= o.ymax + pad &&
               o.ymin <= ymax + pad;
    }
};

BBox piece_bbox(const Piece& p) {
    BBox b;
    b.add(p.start());
    b.add(p.end());
    if (p.is_arc()) {
        const ArcPiece& a = p.arc();
        for (int q = -4; q < 8; ++q) {
            double phi = q * kPi / 2;
            if (a.contains_angle(phi)) b.add(a.center + a.radius * dir_of(phi));
        }
    }
    return b;
}

void build_accel_grid(Table& t) {
    BBox all;
    std::vector<BBox> boxes(t.pieces.size());
    for (size_t i = 0; i < t.pieces.size(); ++i) {
        boxes[i] = piece_bbox(t.pieces[i]);
        all.add({boxes[i].xmin, boxes[i].ymin});
        all.add({boxes[i].xmax, boxes[i].ymax});
    }
    auto g = std::make_shared<CollisionGrid>();
    int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(t.pieces.size()))));
    cells = std::clamp(2 * cells, 32, 2048);
    double pad = 1e-9 * std::max(all.xmax - all.xmin, all.ymax - all.ymin) + 1e-12;
    g->x0 = all.xmin - pad;
    g->y0 = all.ymin - pad;
    g->nx = cells;
    g->ny = cells;
    g->cw = (all.xmax - all.xmin + 2 * pad) / cells;
    g->ch = (all.ymax - all.ymin + 2 * pad) / cells;
    g->cells.resize(static_cast<size_t>(cells) * cells);
    for (size_t i = 0; i < boxes.size(); ++i) {
        int x0 = std::clamp(static_cast<int>((boxes[i].xmin - g->x0) / g->cw), 0, cells - 1);
        int x1 = std::clamp(static_cast<int>((boxes[i].xmax - g->x0) / g->cw), 0, cells - 1);
        int y0 = std::clamp(static_cast<int>((boxes[i].ymin - g->y0) / g->ch), 0, cells - 1);
        int y1 = std::clamp(static_cast<int>((boxes[i].ymax - g->y0) / g->ch), 0, cells - 1);
        for (int cx = x0; cx <= x1; ++cx)
            for (int cy = y0; cy <= y1; ++cy)
                g->cells[static_cast<size_t>(cx) * cells + cy].push_back(static_cast<int>(i));
    }
    t.accel = std::move(g);
}
}  // namespace

Point2 Piece::point_at(double u) const {
    return is_arc() ? arc().point_at(u) : segment().point_at(u);
}
Vec2 Piece::tangent_at(double u) const {
    return is_arc() ? arc().tangent_at(u) : segment().tangent_at(u);
}
double Piece::curvature() const { return is_arc() ? arc().curvature() : 0.0; }
Point2 Piece::start() const { return is_arc() ? arc().start() : segment().start(); }
Point2 Piece::end() const { return is_arc() ? arc().end() : segment().end(); }

BoundaryPoint Table::locate(double s) const {
    s = std::fmod(s, perimeter);
    if (s < 0) s += perimeter;
    int lo = 0, hi = static_cast<int>(pieces.size());
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (pieces[mid].s_offset <= s)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, s - pieces[lo].s_offset};
}

BoundaryPoint Table::locate_on_label(double s, Label want) const {
    BoundaryPoint bp = locate(s);
    if (pieces[bp.piece].label == want) return bp;
    int n = static_cast<int>(pieces.size());
    if (bp.u < 1e-9) {
        int prev = (bp.piece + n - 1) % n;
        if (pieces[prev].label == want) return {prev, pieces[prev].length};
    }
    if (pieces[bp.piece].length - bp.u < 1e-9) {
        int next = (bp.piece + 1) % n;
        if (pieces[next].label == want) return {next, 0.0};
    }
    return bp;
}

double Table::section_length() const {
    double L = 0;
    for (int i : section_pieces) L += pieces[i].length;
    return L;
}

BoundaryPoint Table::locate_on_section(double s) const {
    double L = section_length();
    s = std::fmod(s, L);
    if (s < 0) s += L;
    for (int i : section_pieces) {
        if (s <= pieces[i].length) return {i, s};
        s -= pieces[i].length;
    }
    int last = section_pieces.back();
    return {last, pieces[last].length};
}

const Piece& Table::focusing_piece() const {
    for (const auto& p : pieces)
        if (p.label == Label::focusing) return p;
    throw GeometryError("table has no focusing piece");
}

Table finish_table(std::vector<Piece> pieces, const std::string& family) {
    Table t;
    t.family = family;
    double s = 0;
    for (auto& p : pieces) {
        p.length = p.is_arc() ? p.arc().length() : p.segment().length();
        if (p.length <= 0) throw GeometryError("zero-length piece");
        if (p.label == Label::focusing && p.is_arc() && std::abs(p.arc().sweep) >= kPi)
            throw GeometryError("focusing arc not smaller than a semicircle");
        p.s_offset = s;
        s += p.length;
    }
    t.perimeter = s;
    size_t n = pieces.size();
    for (size_t i = 0; i < n; ++i) {
        Point2 e = pieces[i].end();
        Point2 b = pieces[(i + 1) % n].start();
        if (dist(e, b) > kChainTol) throw GeometryError("piece chain does not close");
        t.vertices.push_back(b);
    }
    t.pieces = std::move(pieces);
    for (size_t i = 0; i < n; ++i)
        if (t.pieces[i].label != Label::flat) t.section_pieces.push_back(static_cast<int>(i));
    if (table_area(t) <= 0) throw GeometryError("boundary chain is not counterclockwise");
    if (t.pieces.size() > 64) build_accel_grid(t);
    return t;
}

// counterclockwise arc through two points with given bulge side
// (focusing arcs bulge away from the interior, dispersing into it)
namespace {

Piece seg_piece(Point2 a, Point2 b, Label label = Label::flat) {
    Piece p;
    p.shape = SegmentPiece{a, b};
    p.label = label;
    return p;
}

}  // namespace

// Minor arc of radius r from a to b. `body_left` puts the arc body on the
// left of the chord a->b; the center then sits on the right and the walk is
// clockwise around it (negative sweep), and vice versa.
Piece make_arc_piece(Point2 a, Point2 b, double r, bool body_left, Label label) {
    Vec2 ch = b - a;
    double d = ch.norm();
    if (2 * r < d * (1 - 1e-12)) throw GeometryError("arc radius too small for chord");
    double half = d / 2;
    double off = std::sqrt(std::max(0.0, r * r - half * half));
    Vec2 mid = a + 0.5 * ch;
    Vec2 n = ch.perp().normalized();  // left of chord
    Point2 c = body_left ? mid - off * n : mid + off * n;
    double pa = std::atan2(a.y - c.y, a.x - c.x);
    double pb = std::atan2(b.y - c.y, b.x - c.x);
    double sweep = pb - pa;
    while (sweep <= -kPi) sweep += 2 * kPi;
    while (sweep > kPi) sweep -= 2 * kPi;
    Piece p;
    p.shape = ArcPiece{c, r, pa, sweep};
    p.label = label;
    return p;
}

Table build_main_table(const MainTableParams& prm) {
    if (!(prm.k_d > -std::sqrt(2.0) && prm.k_d < 0))
        throw GeometryError("k_d must lie in (-sqrt(2), 0)");
    if (!(prm.k_f > 0 && prm.k_f < 2)) throw GeometryError("k_f must lie in (0, 2)");
    if (!(prm.h > 0 && prm.h < 1)) throw GeometryError("h must lie in (0, 1)");
    if (!(prm.l > 0)) throw GeometryError("l must be positive");

    double rf = 1.0 / prm.k_f;
    double rd = 1.0 / -prm.k_d;
    Point2 A{0, 0}, B{1, 0}, C{1, 1}, D{0, 1};
    Point2 mouthR{1, prm.h}, mouthL{0, prm.h};

    std::vector<Piece> ps;
    // bottom focusing arc, bulging outward (below the chord A->B)
    ps.push_back(make_arc_piece(A, B, rf, false, Label::focusing));
    // right strip, walked along the outer wall first
    ps.push_back(seg_piece(B, {1 + prm.l, 0}));
    ps.push_back(seg_piece({1 + prm.l, 0}, {1 + prm.l, prm.h}));
    ps.push_back(seg_piece({1 + prm.l, prm.h}, mouthR));
    // dispersing walls, bulging into the square
    ps.push_back(make_arc_piece(mouthR, C, rd, true, Label::dispersing));
    ps.push_back(make_arc_piece(C, D, rd, true, Label::dispersing));
    ps.push_back(make_arc_piece(D, mouthL, rd, true, Label::dispersing));
    // left strip
    ps.push_back(seg_piece(mouthL, {-prm.l, prm.h}));
    ps.push_back(seg_piece({-prm.l, prm.h}, {-prm.l, 0}));
    ps.push_back(seg_piece({-prm.l, 0}, A));

    Table t = finish_table(std::move(ps), "main");
    t.k_f = prm.k_f;
    t.k_d = prm.k_d;
    t.strips.push_back({B, {1, 0}, {0, 1}, prm.l, prm.h, 1});
    t.strips.push_back({A, {-1, 0}, {0, 1}, prm.l, prm.h, 7});
    validate_no_self_intersections(t);
    return t;
}

Table build_square_table(double side) {
    std::vector<Piece> ps;
    Point2 a{0, 0}, b{side, 0}, c{side, side}, d{0, side};
    ps.push_back(seg_piece(a, b));
    ps.push_back(seg_piece(b, c));
    ps.push_back(seg_piece(c, d));
    ps.push_back(seg_piece(d, a));
    return finish_table(std::move(ps), "square");
}

Table build_disc_table(double r) {
    std::vector<Piece> ps;
    for (int q = 0; q < 4; ++q) {
        Piece p;
        p.shape = ArcPiece{{0, 0}, r, q * kPi / 2, kPi / 2};
        p.label = Label::focusing;
        ps.push_back(p);
    }
    Table t;
    t.family = "disc";
    double s = 0;
    for (auto& p : ps) {
        p.length = p.arc().length();
        p.s_offset = s;
        s += p.length;
    }
    t.perimeter = s;
    t.pieces = std::move(ps);
    for (int i = 0; i < 4; ++i) {
        t.section_pieces.push_back(i);
        t.vertices.push_back(t.pieces[i].end());
    }
    return t;
}

Table build_bulk_table(double k_d, double k_f) {
    double rd = 1.0 / -k_d;
    Point2 A{0, 0}, B{1, 0}, C{1, 1}, D{0, 1};
    std::vector<Piece> ps;
    if (k_f > 0)
        ps.push_back(make_arc_piece(A, B, 1.0 / k_f, false, Label::focusing));
    else
        ps.push_back(seg_piece(A, B));
    ps.push_back(make_arc_piece(B, C, rd, true, Label::dispersing));
    ps.push_back(make_arc_piece(C, D, rd, true, Label::dispersing));
    ps.push_back(make_arc_piece(D, A, rd, true, Label::dispersing));
    Table t = finish_table(std::move(ps), "bulk");
    t.k_f = k_f;
    t.k_d = k_d;
    return t;
}

DiscRegion make_disc_D_beta(const Table& table, double global_s, const Beta& beta) {
    return make_disc_D_beta(table, table.locate(global_s), beta);
}

DiscRegion make_disc_D_beta(const Table& table, const BoundaryPoint& bp, const Beta& beta) {
    DiscRegion r;
    r.base = table.point_at(bp);
    r.inner_normal = table.inner_normal_at(bp);
    r.beta = beta;
    double k = table.curvature_at(bp);
    if (beta.kind == Beta::zero_plus) {
        r.kind = DiscRegion::internal_halfplane;
        return r;
    }
    if (beta.kind == Beta::zero_minus) {
        r.kind = DiscRegion::external_halfplane;
        return r;
    }
    if (k == 0.0) throw FlatPointError("D_beta undefined at a flat point for beta != 0+-");
    r.kind = DiscRegion::disc;
    if (beta.kind == Beta::infinite) {
        r.radius = 0.0;
        r.center = r.base;
        return r;
    }
    r.radius = 1.0 / std::abs(beta.value * k);
    r.center = beta.value > 0 ? r.base + r.radius * r.inner_normal
                              : r.base - r.radius * r.inner_normal;
    return r;
}

Chord chord_I(const Table& table, const BoundaryPoint& sd, const BoundaryPoint& sf) {
    if (table.pieces[sd.piece].label != Label::dispersing)
        throw GeometryError("chord_I: s' must lie on a dispersing piece");
    if (table.pieces[sf.piece].label != Label::focusing)
        throw GeometryError("chord_I: s'' must lie on a focusing piece");
    Point2 pd = table.point_at(sd);
    Point2 pf = table.point_at(sf);
    DiscRegion d2 = make_disc_D_beta(table, sd, Beta::of(-2.0));
    // the base point sits on the rim of its own disc
    assert(std::abs(dist(pd, d2.center) - d2.radius) < 1e-9);
    Vec2 dir = (pf - pd).normalized();
    double ts[2];
    int n = line_circle_intersect(pd, dir, d2.center, d2.radius, ts);
    if (n == 0) return {pd, pd};  // tangent line, degenerate chord
    double t0 = std::min({ts[0], ts[1], 0.0});
    double t1 = std::max({ts[0], ts[1], 0.0});
    // one endpoint is s' itself (t = 0)
    return {pd + t0 * dir, pd + t1 * dir};
}

namespace {

struct SectionChart {
    const Table* table;
    std::vector<int> pieces;  // piece indices
    std::vector<double> offsets;
    double total = 0;

    SectionChart(const Table& t, Label want) : table(&t) {
        for (size_t i = 0; i < t.pieces.size(); ++i) {
            if (t.pieces[i].label == want) {
                pieces.push_back(static_cast<int>(i));
                offsets.push_back(total);
                total += t.pieces[i].length;
            }
        }
    }
    BoundaryPoint at(double s) const {
        s = std::clamp(s, 0.0, total);
        for (size_t j = 0; j + 1 < pieces.size(); ++j)
            if (s <= offsets[j + 1]) return {pieces[j], s - offsets[j]};
        return {pieces.back(), s - offsets.back()};
    }
};

double golden_min(double a, double b, const std::function<double(double)>& f, int iters,
                  double* argmin) {
    const double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    if (f1 < f2) {
        *argmin = x1;
        return f1;
    }
    *argmin = x2;
    return f2;
}

}  // namespace

C1Result check_C1(const Table& table, const C1Options& opt) {
    SectionChart disp(table, Label::dispersing);
    SectionChart foc(table, Label::focusing);
    if (disp.pieces.empty() || foc.pieces.empty())
        throw GeometryError("check_C1 needs dispersing and focusing pieces");

    auto margin_at = [&](double sd, double sf) {
        BoundaryPoint bd = disp.at(sd);
        BoundaryPoint bf = foc.at(sf);
        DiscRegion d4 = make_disc_D_beta(table, bf, Beta::of(4.0));
        Chord I = chord_I(table, bd, bf);
        return region_margin(d4, I);
    };

    int nd = opt.grid_d, nf = opt.grid_f;
    double hd = disp.total / nd, hf = foc.total / nf;
    std::vector<double> grid(static_cast<size_t>(nd + 1) * (nf + 1));
    auto idx = [&](int i, int j) { return static_cast<size_t>(i) * (nf + 1) + j; };

#pragma omp parallel for schedule(static) if (opt.parallel)
    for (int i = 0; i <= nd; ++i)
        for (int j = 0; j <= nf; ++j) grid[idx(i, j)] = margin_at(i * hd, j * hf);

    // local minima of the grid (including edges)
    struct Seed {
        int i, j;
        double v;
    };
    std::vector<Seed> seeds;
    double gmin = grid[0];
    for (int i = 0; i <= nd; ++i)
        for (int j = 0; j <= nf; ++j) {
            double v = grid[idx(i, j)];
            gmin = std::min(gmin, v);
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii > nd || jj > nf || (di == 0 && dj == 0)) continue;
                    if (grid[idx(ii, jj)] < v) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) seeds.push_back({i, j, v});
        }
    // refine the competitive local minima by coordinate golden section
    double slack = std::max(1e-6, 0.05 * std::abs(gmin));
    C1Result res;
    res.margin = gmin;
    res.eps_grid = std::max(hd, hf);
    double best = 1e300, best_sd = 0, best_sf = 0;
    std::vector<double> refined;
    for (const auto& s : seeds) {
        if (s.v > gmin + slack) continue;
        double sd = s.i * hd, sf = s.j * hf;
        double lo_d = std::max(0.0, sd - hd), hi_d = std::min(disp.total, sd + hd);
        double lo_f = std::max(0.0, sf - hf), hi_f = std::min(foc.total, sf + hf);
        double v = s.v;
        for (int round = 0; round < opt.refine_rounds; ++round) {
            v = golden_min(lo_d, hi_d, [&](double x) { return margin_at(x, sf); }, 50, &sd);
            v = golden_min(lo_f, hi_f, [&](double x) { return margin_at(sd, x); }, 50, &sf);
            lo_d = std::max(0.0, sd - (hi_d - lo_d) * 0.25);
            hi_d = std::min(disp.total, sd + (hi_d - lo_d) * 0.25);
            lo_f = std::max(0.0, sf - (hi_f - lo_f) * 0.25);
            hi_f = std::min(foc.total, sf + (hi_f - lo_f) * 0.25);
        }
        refined.push_back(v);
        if (v < best) {
            best = v;
            best_sd = sd;
            best_sf = sf;
        }
    }
    if (!refined.empty()) res.margin = std::min(best, gmin);
    res.witness_sd = table.global_s(disp.at(best_sd));
    res.witness_sf = table.global_s(foc.at(best_sf));
    res.ok = res.margin >= 0.0;
    res.eps_grid = std::max(hd, hf) * std::pow(0.25, opt.refine_rounds);
    for (double v : refined)
        if (v <= res.margin + 1e-9) res.near_critical_pairs++;
    return res;
}

double compute_h_o(double k_d, double k_f, const C1Options& opt) {
    auto margin_of = [&](double h) {
        MainTableParams p{k_d, k_f, h, 1.0 / k_f};
        Table t = build_main_table(p);
        return check_C1(t, opt).margin;
    };
    double lo = 1e-6, hi = 0.95;  // the mouth must stay below the top corners
    std::vector<std::pair<double, double>> trace;
    double m_hi = margin_of(hi);
    trace.push_back({hi, m_hi});
    if (m_hi < 0) throw NoSolutionError("containment condition fails at the upper bracket");
    double m_lo = margin_of(lo);
    trace.push_back({lo, m_lo});
    if (m_lo >= 0) return lo;
    while ((hi - lo) / hi > 1e-10) {
        double mid = 0.5 * (hi + lo);
        double m = margin_of(mid);
        trace.push_back({mid, m});
        if (m >= 0)
            hi = mid;
        else
            lo = mid;
    }
    // empirical monotonicity of the margin in h over the trace
    std::sort(trace.begin(), trace.end());
    for (size_t i = 1; i < trace.size(); ++i)
        if (trace[i].second < trace[i - 1].second - 1e-7)
            throw GeometryError("containment margin is not monotone in h");
    return hi;
}

std::pair<Table, GeometryCertificate> build_optimal_table(double k_d, double k_f,
                                                          const C1Options& opt) {
    double h_o = compute_h_o(k_d, k_f, opt);
    MainTableParams p{k_d, k_f, h_o, 1.0 / k_f};
    Table t = build_main_table(p);
    t.family = "optimal";
    GeometryCertificate cert = make_certificate(t, p, opt);
    return {std::move(t), cert};
}

GeometryCertificate make_certificate(const Table& table, const MainTableParams& p,
                                     const C1Options& opt) {
    GeometryCertificate c;
    c.c1 = check_C1(table, opt);
    c.c2_margin = p.l - 1.0 / p.k_f;
    c.c2_ok = c.c2_margin >= -1e-12 / p.k_f;
    c.area = table_area(table);
    c.diameter = table_diameter(table);
    c.h = p.h;
    c.l = p.l;
    return c;
}

double table_area(const Table& table) {
    double twice = 0;
    for (const auto& p : table.pieces) {
        if (p.is_arc()) {
            const ArcPiece& a = p.arc();
            Point2 p1 = a.start(), p2 = a.end();
            twice += a.radius * a.radius * a.sweep + a.center.cross(p2 - p1);
        } else {
            const SegmentPiece& s = p.segment();
            twice += s.a.cross(s.b);
        }
    }
    return 0.5 * twice;
}

namespace {

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> h(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) k--;
        h[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) k--;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

}  // namespace

double table_diameter(const Table& table) {
    std::vector<Point2> pts;
    pts.reserve(table.pieces.size() + 64);
    for (const auto& p : table.pieces) {
        pts.push_back(p.start());
        if (p.is_arc()) {
            const ArcPiece& a = p.arc();
            int n = 512;
            for (int i = 1; i < n; ++i) pts.push_back(a.point_at(a.length() * i / n));
        }
    }
    std::vector<Point2> h = convex_hull(std::move(pts));
    size_t n = h.size();
    if (n == 1) return 0;
    if (n == 2) return dist(h[0], h[1]);
    // rotating calipers
    double best = 0;
    size_t j = 1;
    for (size_t i = 0; i < n; ++i) {
        Point2 a = h[i], b = h[(i + 1) % n];
        while (true) {
            size_t jn = (j + 1) % n;
            if ((b - a).cross(h[jn] - h[j]) > 0)
                j = jn;
            else
                break;
        }
        best = std::max({best, dist(a, h[j]), dist(b, h[j])});
    }
    return best;
}

namespace {

// intersection points of two pieces (geometric loci)
std::vector<Point2> piece_intersections(const Piece& A, const Piece& B) {
    std::vector<Point2> out;
    auto add_arc_hits = [&](const ArcPiece& arc, Point2 p0, Vec2 d, double len,
                            bool param_is_segment) {
        double ts[2];
        int n = line_circle_intersect(p0, d, arc.center, arc.radius, ts);
        for (int i = 0; i < n; ++i) {
            if (i == 1 && ts[1] == ts[0]) break;
            double t = ts[i];
            if (param_is_segment && (t < 0 || t > len)) continue;
            Point2 q = p0 + t * d;
            double phi = std::atan2(q.y - arc.center.y, q.x - arc.center.x);
            if (arc.contains_angle(phi)) out.push_back(q);
        }
    };
    if (!A.is_arc() && !B.is_arc()) {
        const auto& s1 = A.segment();
        const auto& s2 = B.segment();
        Vec2 r = s1.b - s1.a, s = s2.b - s2.a;
        double rxs = r.cross(s);
        Vec2 qp = s2.a - s1.a;
        if (std::abs(rxs) < 1e-14 * r.norm() * s.norm()) {
            // parallel: collinear overlap?
            if (std::abs(qp.cross(r)) < 1e-12 * r.norm()) {
                double rr = r.norm2();
                double t0 = qp.dot(r) / rr, t1 = (s2.b - s1.a).dot(r) / rr;
                if (t0 > t1) std::swap(t0, t1);
                double a = std::max(0.0, t0), b = std::min(1.0, t1);
                if (a <= b) {
                    out.push_back(s1.a + a * r);
                    if (b > a) out.push_back(s1.a + b * r);
                }
            }
            return out;
        }
        double t = qp.cross(s) / rxs, u = qp.cross(r) / rxs;
        if (t >= 0 && t <= 1 && u >= 0 && u <= 1) out.push_back(s1.a + t * r);
        return out;
    }
    if (A.is_arc() && !B.is_arc()) {
        const auto& s = B.segment();
        add_arc_hits(A.arc(), s.a, (s.b - s.a).normalized(), s.length(), true);
        return out;
    }
    if (!A.is_arc() && B.is_arc()) {
        const auto& s = A.segment();
        add_arc_hits(B.arc(), s.a, (s.b - s.a).normalized(), s.length(), true);
        return out;
    }
    const ArcPiece& a1 = A.arc();
    const ArcPiece& a2 = B.arc();
    double d = dist(a1.center, a2.center);
    if (d < 1e-12 && std::abs(a1.radius - a2.radius) < 1e-12) {
        // same circle: overlap iff angular spans intersect beyond a point
        int nprobe = 64;
        for (int i = 0; i <= nprobe; ++i) {
            double phi = a1.angle_at(a1.length() * i / nprobe);
            if (a2.contains_angle(phi)) out.push_back(a1.center + a1.radius * dir_of(phi));
        }
        return out;
    }
    if (d > a1.radius + a2.radius || d < std::abs(a1.radius - a2.radius)) return out;
    double x = (d * d + a1.radius * a1.radius - a2.radius * a2.radius) / (2 * d);
    double y2 = a1.radius * a1.radius - x * x;
    double y = y2 > 0 ? std::sqrt(y2) : 0.0;
    Vec2 u = (a2.center - a1.center) * (1.0 / d);
    Vec2 v = u.perp();
    for (double sgn : {1.0, -1.0}) {
        Point2 q = a1.center + x * u + sgn * y * v;
        double p1 = std::atan2(q.y - a1.center.y, q.x - a1.center.x);
        double p2 = std::atan2(q.y - a2.center.y, q.x - a2.center.x);
        if (a1.contains_angle(p1) && a2.contains_angle(p2)) out.push_back(q);
        if (y == 0.0) break;
    }
    return out;
}

}  // namespace

void validate_no_self_intersections(const Table& table) {
    size_t n = table.pieces.size();
    std::vector<BBox> boxes(n);
    for (size_t i = 0; i < n; ++i) boxes[i] = piece_bbox(table.pieces[i]);

    auto check_pair = [&](size_t i, size_t j) {
        bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
        auto hits = piece_intersections(table.pieces[i], table.pieces[j]);
        for (const Point2& q : hits) {
            if (adjacent) {
                Point2 shared = (j == i + 1) ? table.pieces[i].end() : table.pieces[j].end();
                if (dist(q, shared) < 1e-9) continue;
            }
            throw GeometryError("boundary pieces " + std::to_string(i) + " and " +
                                std::to_string(j) + " intersect");
        }
    };

    if (n <= 3000) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (boxes[i].overlaps(boxes[j], 0.0)) check_pair(i, j);
        return;
    }
    // grid-bucketed candidate pairs for large tables
    BBox all;
    for (const auto& b : boxes) {
        all.add({b.xmin, b.ymin});
        all.add({b.xmax, b.ymax});
    }
    int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    cells = std::clamp(cells, 16, 1024);
    double cw = (all.xmax - all.xmin) / cells, ch = (all.ymax - all.ymin) / cells;
    std::vector<std::vector<int>> bucket(static_cast<size_t>(cells) * cells);
    auto cell_of = [&](double x, double y) {
        int cx = std::clamp(static_cast<int>((x - all.xmin) / cw), 0, cells - 1);
        int cy = std::clamp(static_cast<int>((y - all.ymin) / ch), 0, cells - 1);
        return std::pair<int, int>{cx, cy};
    };
    for (size_t i = 0; i < n; ++i) {
        auto [x0, y0] = cell_of(boxes[i].xmin, boxes[i].ymin);
        auto [x1, y1] = cell_of(boxes[i].xmax, boxes[i].ymax);
        for (int cx = x0; cx <= x1; ++cx)
            for (int cy = y0; cy <= y1; ++cy)
                bucket[static_cast<size_t>(cx) * cells + cy].push_back(static_cast<int>(i));
    }
    for (const auto& cell : bucket) {
        for (size_t a = 0; a < cell.size(); ++a)
            for (size_t b = a + 1; b < cell.size(); ++b) {
                size_t i = std::min(cell[a], cell[b]);
                size_t j = std::max(cell[a], cell[b]);
                if (boxes[i].overlaps(boxes[j], 0.0)) check_pair(i, j);
            }
    }
}

}  // namespace hypb
