#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "hypb/geometry.hpp"
#include "hypb/table.hpp"

using namespace hypb;

TEST_CASE("ray vs full circle, collinear") {
    ArcPiece full{{2, 0}, 1.0, 0.0, 2 * 3.14159265358979323846 - 1e-12};
    Ray r{{0, 0}, {1, 0}};
    auto hits = ray_intersect_arc(r, full);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hits[1].t == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hits[0].t < hits[1].t);
}

TEST_CASE("ray vs segment") {
    SegmentPiece seg{{2, -1}, {2, 1}};
    Ray r{{0, 0}, {1, 0}};
    auto hits = ray_intersect_segment(r, seg);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].t == doctest::Approx(2.0));
    CHECK(hits[0].point.x == doctest::Approx(2.0));
    CHECK(hits[0].point.y == doctest::Approx(0.0));
}

TEST_CASE("tangent ray acceptance and rejection branches") {
    // circle center (0,1), radius 1; the x-axis is tangent at the origin
    ArcPiece arc{{0, 1}, 1.0, -3.14159265358979323846 / 2 - 0.5, 1.0};
    Ray touching{{-5, 0}, {1, 0}};
    auto hits = ray_intersect_arc(touching, arc);
    CHECK(hits.size() >= 1);  // grazing contact is still reported here
    Ray missing{{-5, -1e-6}, {1, 0}};
    CHECK(ray_intersect_arc(missing, arc).empty());
}

TEST_CASE("returned intersections lie on the locus and on the ray") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
        Ray r{{u(rng), u(rng)}, dir_of(u(rng))};
        ArcPiece arc{{u(rng), u(rng)}, std::abs(u(rng)) + 0.2, u(rng), 1.3};
        for (const auto& h : ray_intersect_arc(r, arc)) {
            CHECK(std::abs(dist(h.point, arc.center) - arc.radius) < 1e-10);
            CHECK(dist(h.point, r.origin + h.t * r.direction) < 1e-9);
        }
        SegmentPiece seg{{u(rng), u(rng)}, {u(rng), u(rng)}};
        for (const auto& h : ray_intersect_segment(r, seg)) {
            Vec2 e = (seg.b - seg.a).normalized();
            double proj = (h.point - seg.a).dot(e);
            CHECK(dist(h.point, seg.a + proj * e) < 1e-10);
            CHECK(proj > -1e-10);
            CHECK(proj < seg.length() + 1e-10);
        }
    }
}

TEST_CASE("disc regions about boundary points") {
    Table bulk = build_bulk_table(-1.0, 0.1);
    const Piece& foc = bulk.focusing_piece();
    REQUIRE(foc.curvature() == doctest::Approx(0.1));
    BoundaryPoint bp{0, foc.length / 2};

    SUBCASE("beta = 2 at a focusing point: internal disc of radius 5") {
        DiscRegion d = make_disc_D_beta(bulk, bp, Beta::of(2.0));
        CHECK(d.kind == DiscRegion::disc);
        CHECK(d.radius == doctest::Approx(5.0));
        // internal tangency: the center sits along the inner normal
        Vec2 n = bulk.inner_normal_at(bp);
        CHECK(dist(d.center, d.base + 5.0 * n) < 1e-12);
        CHECK(std::abs(dist(d.center, d.base) - d.radius) < 1e-10);
    }
    SUBCASE("beta = 0+ gives the internal halfplane") {
        DiscRegion d = make_disc_D_beta(bulk, bp, Beta::zplus());
        CHECK(d.kind == DiscRegion::internal_halfplane);
        CHECK(region_contains(d, d.base + 0.5 * d.inner_normal));
        CHECK(!region_contains(d, d.base - 0.5 * d.inner_normal));
    }
    SUBCASE("beta = -4 at a dispersing point: external disc of radius 1/4") {
        BoundaryPoint disp{1, bulk.pieces[1].length / 2};
        DiscRegion d = make_disc_D_beta(bulk, disp, Beta::of(-4.0));
        CHECK(d.radius == doctest::Approx(0.25));
        Vec2 n = bulk.inner_normal_at(disp);
        CHECK(dist(d.center, d.base - 0.25 * n) < 1e-12);
    }
    SUBCASE("flat point rejects finite beta") {
        Table sq = build_square_table();
        CHECK_THROWS_AS(make_disc_D_beta(sq, BoundaryPoint{0, 0.5}, Beta::of(2.0)),
                        FlatPointError);
        CHECK_NOTHROW(make_disc_D_beta(sq, BoundaryPoint{0, 0.5}, Beta::zplus()));
    }
}

TEST_CASE("D_beta mirror symmetry and monotonicity") {
    Table bulk = build_bulk_table(-1.0, 0.2);
    BoundaryPoint bp{0, bulk.pieces[0].length / 3};
    Vec2 n = bulk.inner_normal_at(bp);
    Point2 base = bulk.point_at(bp);
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        DiscRegion dp = make_disc_D_beta(bulk, bp, Beta::of(beta));
        DiscRegion dm = make_disc_D_beta(bulk, bp, Beta::of(-beta));
        CHECK(dp.radius == doctest::Approx(dm.radius));
        // mirror across the tangent line: reflected center matches
        Vec2 off = dp.center - base;
        Point2 reflected = base + off - 2.0 * off.dot(n) * n;
        CHECK(dist(reflected, dm.center) < 1e-12);
    }
    // beta1 >= beta2 > 0 implies D_beta1 inside D_beta2
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double b2 = 0.5 + 4 * u(rng);
        double b1 = b2 + 3 * u(rng);
        DiscRegion d1 = make_disc_D_beta(bulk, bp, Beta::of(b1));
        DiscRegion d2 = make_disc_D_beta(bulk, bp, Beta::of(b2));
        double ang = 2 * 3.14159 * u(rng);
        Point2 p = d1.center + d1.radius * u(rng) * dir_of(ang);
        CHECK(region_contains(d2, p, 1e-12));
    }
}

TEST_CASE("region containment margins") {
    DiscRegion d;
    d.kind = DiscRegion::disc;
    d.center = {1, 1};
    d.radius = 2;
    CHECK(region_contains(d, d.center));
    CHECK(!region_contains(d, Point2{1 + 2 * (1 + 1e-6), 1}));
    CHECK(region_margin(d, Point2{2, 1}) == doctest::Approx(1.0));
    // segment containment equals dense sampling (convexity)
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        Chord c{{u(rng), u(rng)}, {u(rng), u(rng)}};
        bool ends = region_contains(d, c);
        bool dense = true;
        for (int k = 0; k <= 64; ++k) {
            Point2 p = c.a + (c.b - c.a) * (k / 64.0);
            if (!region_contains(d, p, 1e-12)) dense = false;
        }
        CHECK(ends == dense);
    }
}

TEST_CASE("chord of D_{-2} through a dispersing and a focusing point") {
    Table t = build_main_table({-1.0, 0.05, 0.1, 20.0});
    // piece 4 = right dispersing wall, piece 0 = focusing arc
    BoundaryPoint sd{4, t.pieces[4].length * 0.1};
    BoundaryPoint sf{0, t.pieces[0].length * 0.3};
    Chord I = chord_I(t, sd, sf);
    DiscRegion d2 = make_disc_D_beta(t, sd, Beta::of(-2.0));
    // both endpoints on the rim of D_{-2}(s'), within the algebraic residual
    CHECK(std::abs(dist(I.a, d2.center) - d2.radius) < 1e-10);
    CHECK(std::abs(dist(I.b, d2.center) - d2.radius) < 1e-10);
    // one endpoint is s' itself
    Point2 pd = t.point_at(sd);
    CHECK((dist(I.a, pd) < 1e-10 || dist(I.b, pd) < 1e-10));
    // chord through the disc center has length 2r (diameter chord)
    {
        double ts[2];
        Vec2 dirc = (d2.center - pd).normalized();
        int n = line_circle_intersect(pd, dirc, d2.center, d2.radius, ts);
        REQUIRE(n == 2);
        CHECK(std::abs((ts[1] - ts[0]) - 2 * d2.radius) < 1e-10);
        CHECK(2 * d2.radius == doctest::Approx(1.0));  // 1/|k_d|
    }
}

TEST_CASE("chord_I is equivariant under the table's mirror symmetry") {
    // the main table is symmetric across x = 1/2; right-wall pairs map to
    // left-wall pairs with the chord reflected
    Table t = build_main_table({-0.9, 0.05, 0.12, 20.0});
    const Piece& right = t.pieces[4];
    const Piece& left = t.pieces[6];
    const Piece& foc = t.pieces[0];
    REQUIRE(right.label == Label::dispersing);
    REQUIRE(left.label == Label::dispersing);
    auto mirror = [](Point2 p) { return Point2{1.0 - p.x, p.y}; };
    for (double fd : {0.15, 0.4, 0.8}) {
        for (double ff : {0.2, 0.6, 0.9}) {
            BoundaryPoint sd{4, right.length * fd};
            BoundaryPoint sf{0, foc.length * ff};
            // mirrored: the left wall is walked top-down, the arc right-left
            BoundaryPoint sd_m{6, left.length * (1.0 - fd)};
            BoundaryPoint sf_m{0, foc.length * (1.0 - ff)};
            CHECK(dist(mirror(t.point_at(sd)), t.point_at(sd_m)) < 1e-10);
            Chord a = chord_I(t, sd, sf);
            Chord b = chord_I(t, sd_m, sf_m);
            bool same = dist(mirror(a.a), b.a) < 1e-9 && dist(mirror(a.b), b.b) < 1e-9;
            bool swapped = dist(mirror(a.a), b.b) < 1e-9 && dist(mirror(a.b), b.a) < 1e-9;
            CHECK((same || swapped));
        }
    }
}
