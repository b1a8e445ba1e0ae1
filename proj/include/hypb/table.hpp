#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hypb/geometry.hpp"

namespace hypb {

enum class Label { focusing, dispersing, flat };

inline const char* label_name(Label l) {
    switch (l) {
        case Label::focusing: return "focusing";
        case Label::dispersing: return "dispersing";
        case Label::flat: return "flat";
    }
    return "?";
}

struct Piece {
    std::variant<ArcPiece, SegmentPiece> shape;
    Label label = Label::flat;
    double s_offset = 0.0;  // global arclength of the piece start
    double length = 0.0;

    bool is_arc() const { return std::holds_alternative<ArcPiece>(shape); }
    const ArcPiece& arc() const { return std::get<ArcPiece>(shape); }
    const SegmentPiece& segment() const { return std::get<SegmentPiece>(shape); }

    Point2 point_at(double u) const;
    Vec2 tangent_at(double u) const;
    Vec2 inner_normal_at(double u) const { return tangent_at(u).perp(); }
    double curvature() const;
    Point2 start() const;
    Point2 end() const;
};

// Location on the boundary: piece index plus local arclength.
struct BoundaryPoint {
    int piece = 0;
    double u = 0.0;
};

// Axis-aligned rectangular strip attached to the bulk through a mouth gate;
// used for the closed-form traversal fast path.
struct StripInfo {
    Point2 corner;   // mouth corner on the outer wall side
    Vec2 axis_u;     // unit, pointing into the strip
    Vec2 axis_n;     // unit, across the strip (corner + h*axis_n = inner mouth corner)
    double length = 0.0;
    double height = 0.0;
    int first_piece = -1;  // outer wall piece index (walls are consecutive: outer, end, inner)
};

// One polygonal spiral corridor: a chain of right trapezoids. Trapezoid i
// (1-based in the exported lists) has entry gate `gate[i-1]`, walls on the
// inner/outer bank, and exit gate `gate[i]`; gate[N] is the sealed end.
struct SpiralInfo {
    std::vector<Point2> inner;    // inner-wall corners, size N+1
    std::vector<Point2> outer;    // outer-wall corners, size N+1
    std::vector<double> heights;  // h_i, size N+1 (h_{N+1} = end leg length)
    std::vector<double> lengths;  // l_i (shorter bases), size N
    std::vector<double> gammas;   // gamma_i, size N
    int first_piece = -1;         // outer walls start here; layout: N outer, end, N inner
    int trapezoid_count() const { return static_cast<int>(lengths.size()); }
};

struct SpiralParams {
    double r0 = 3.0;         // initial ray of the double spiral
    int m_right = 4;         // prefix trapezoids, right spiral
    int m_left = 12;         // prefix trapezoids, left spiral
    double prefix_gamma_num = 1.0, prefix_gamma_den = 8.0;  // gamma = pi * num/den
    double gap_fraction = 0.15;  // fraction of w0 left as clearance on each side
    int n_bar = 0;           // corners per round (derived)
    int rounds = 0;          // M (derived)
    double w0 = 0.0;         // initial width of the double spiral (derived)
    double k4 = 0.0;         // prefix height-product constant (derived)
    double h = 0.0;          // mouth height (derived, in [h_o, 2 h_o])
    Point2 center;           // center A of the double spiral (derived)
};

struct C1Result {
    bool ok = false;
    double margin = 0.0;        // global minimum containment margin (signed)
    double witness_sd = 0.0;    // global arclength of the worst dispersing point
    double witness_sf = 0.0;    // global arclength of the worst focusing point
    int near_critical_pairs = 0;
    double eps_grid = 0.0;      // refinement resolution actually reached
};

struct GeometryCertificate {
    C1Result c1;
    bool c2_ok = false;
    double c2_margin = 0.0;  // l - 1/k_f
    double area = 0.0;
    double diameter = 0.0;
    double h = 0.0, l = 0.0;
    // spiral conditions (set by the spiral builder, margins signed)
    bool is_spiral = false;
    bool spiral_ok = false;
    double k1_measured = 0.0;  // max h_N / h_o
    double k2_measured = 0.0;  // sum l_i / l_o
    double k3_measured = 0.0;  // max h_i tan(gamma_i) / l_i
    double sum_l_right = 0.0, sum_l_left = 0.0;
    bool passed() const { return c1.ok && c2_ok && (!is_spiral || spiral_ok); }
};

// Uniform-grid spatial index over piece bounding boxes; built by
// finish_table for tables with many pieces.
struct CollisionGrid {
    double x0 = 0, y0 = 0, cw = 1, ch = 1;
    int nx = 0, ny = 0;
    std::vector<std::vector<int>> cells;
};

struct Table {
    std::vector<Piece> pieces;
    double perimeter = 0.0;
    std::vector<Point2> vertices;
    std::vector<int> section_pieces;  // focusing + dispersing piece indices (the section)
    std::vector<StripInfo> strips;
    std::vector<SpiralInfo> spirals;
    std::shared_ptr<const CollisionGrid> accel;
    std::string family;  // "main", "optimal", "spiral", test families
    double k_f = 0.0, k_d = 0.0;

    Point2 point_at(const BoundaryPoint& bp) const { return pieces[bp.piece].point_at(bp.u); }
    Vec2 tangent_at(const BoundaryPoint& bp) const { return pieces[bp.piece].tangent_at(bp.u); }
    Vec2 inner_normal_at(const BoundaryPoint& bp) const {
        return pieces[bp.piece].inner_normal_at(bp.u);
    }
    double curvature_at(const BoundaryPoint& bp) const { return pieces[bp.piece].curvature(); }
    double global_s(const BoundaryPoint& bp) const {
        return pieces[bp.piece].s_offset + bp.u;
    }
    BoundaryPoint locate(double global_s) const;
    // locate, snapping to an adjacent piece of the wanted label when the
    // position falls on a junction (e.g. containment witnesses at wall feet)
    BoundaryPoint locate_on_label(double global_s, Label want) const;

    double section_length() const;  // total arclength of focusing + dispersing pieces
    // map an arclength position along the section to a boundary point
    BoundaryPoint locate_on_section(double section_s) const;

    const Piece& focusing_piece() const;
};

struct MainTableParams {
    double k_d = -1.0;  // in (-sqrt(2), 0)
    double k_f = 0.01;  // > 0
    double h = 0.0;     // strip/mouth height
    double l = 0.0;     // strip length
};

// Finalize a piece chain into a table: arclength offsets, vertices,
// closure and orientation checks. Throws GeometryError on a broken chain.
Table finish_table(std::vector<Piece> pieces, const std::string& family);

// Minor arc of radius r joining a to b, with the arc body on the given side
// of the chord. Dispersing pieces bulge into the table (body on the interior
// side); focusing pieces bulge away from it.
Piece make_arc_piece(Point2 a, Point2 b, double r, bool body_left, Label label);

// Pairwise piece intersection check (adjacent pieces may share an endpoint).
// Throws GeometryError on any violation.
void validate_no_self_intersections(const Table& table);

// Bulk square with three dispersing walls through the top corners, a focusing
// bottom arc bulging outward, and two rectangular strips of height h and
// length l attached through mouth gates at the bottoms of the lateral walls.
Table build_main_table(const MainTableParams& p);

// Test tables.
Table build_square_table(double side = 1.0);
Table build_disc_table(double radius = 1.0);
// Bulk only, no strips; k_f = 0 gives a flat bottom (semidispersing table).
Table build_bulk_table(double k_d, double k_f);

// D_beta(s) about the boundary point at global arclength s.
DiscRegion make_disc_D_beta(const Table& table, double global_s, const Beta& beta);
DiscRegion make_disc_D_beta(const Table& table, const BoundaryPoint& bp, const Beta& beta);

// Intersection of the line through the dispersing point s' and the focusing
// point s'' with the disc D_{-2}(s'). Never empty: s' lies on the disc rim.
Chord chord_I(const Table& table, const BoundaryPoint& sd, const BoundaryPoint& sf);

struct C1Options {
    int grid_d = 400;
    int grid_f = 400;
    int refine_rounds = 3;
    bool parallel = true;
};

C1Result check_C1(const Table& table, const C1Options& opt = {});

// Minimal strip height for which the containment condition holds, by
// bisection (relative tolerance 1e-10); asserts empirical monotonicity of
// the margin along the bisection trace.
double compute_h_o(double k_d, double k_f, const C1Options& opt = {});

std::pair<Table, GeometryCertificate> build_optimal_table(double k_d, double k_f,
                                                          const C1Options& opt = {});

double table_area(const Table& table);
double table_diameter(const Table& table);

GeometryCertificate make_certificate(const Table& table, const MainTableParams& p,
                                     const C1Options& opt = {});

}  // namespace hypb
