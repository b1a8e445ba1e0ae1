#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "hypb/tangent.hpp"

using namespace hypb;

namespace {
constexpr double kPi = 3.14159265358979323846;

double proj_dist(const FocalCoord& a, const FocalCoord& b) {
    double d = proj_offset(a, b);
    return std::min(d, kPi - d);
}
}  // namespace

TEST_CASE("focal coordinates from tangent vectors") {
    SUBCASE("ds = 0 branch gives f+- = 0") {
        auto [fp, fm] = focal_from_vector({0.0, 1.0}, 0.3, -1.0);
        CHECK(fp.value() == 0.0);
        CHECK(fm.value() == 0.0);
    }
    SUBCASE("ds = 1, dalpha = 0, alpha = 0, k = -1") {
        auto [fp, fm] = focal_from_vector({1.0, 0.0}, 0.0, -1.0);
        CHECK(fp.value() == doctest::Approx(-1.0));
        CHECK(fm.value() == doctest::Approx(1.0));
    }
    SUBCASE("pole of the + branch") {
        double k = 0.7;
        auto [fp, fm] = focal_from_vector({1.0, k}, 0.2, k);
        CHECK(fp.is_infinite());
        CHECK(!fm.is_infinite());
    }
    SUBCASE("nearby ds != 0 vectors approach the ds = 0 limit") {
        for (double eps : {1e-6, 1e-9, 1e-12}) {
            auto [fp, fm] = focal_from_vector({eps, 1.0}, 0.1, 0.5);
            CHECK(std::abs(fp.value()) < 2 * eps);
            CHECK(std::abs(fm.value()) < 2 * eps);
        }
    }
    CHECK_THROWS_AS(focal_from_vector({0.0, 0.0}, 0.0, 1.0), ZeroVectorError);
}

TEST_CASE("mirror equation") {
    SUBCASE("flat mirror: f+ = f-") {
        FocalCoord f = FocalCoord::of(-2.5);
        FocalCoord g = mirror_reflect(f, 0.0, 0.4);
        CHECK(g.value() == doctest::Approx(-2.5));
    }
    SUBCASE("parallel incoming beam focuses at cos(alpha)/(2k)") {
        FocalCoord g = mirror_reflect(FocalCoord::infinity(), 0.2, 0.5);
        CHECK(g.value() == doctest::Approx(std::cos(0.5) / 0.4));
    }
    SUBCASE("two-ray oracle on an exact circle") {
        // reflect two nearby rays from a common source off the circle and
        // intersect the outgoing lines
        double R = 1.7;
        Point2 C{0, 0};
        double alpha = 0.37;
        double k = 1.0 / R;  // focusing circle seen from inside
        Point2 P = C + R * dir_of(0.3);
        Vec2 n = -dir_of(0.3);  // inner normal points to the center
        Vec2 t = n.perp();
        // incoming direction: heading into the wall, angle alpha off the normal
        Vec2 u_minus = -std::cos(alpha) * n + std::sin(alpha) * t;
        double d_src = 0.9;  // real source inside the table: f- = -d_src
        Point2 S = P - d_src * u_minus;
        double delta = 1e-6;
        Point2 P2 = C + R * dir_of(0.3 + delta / R);
        Vec2 v2 = (P2 - S).normalized();
        auto reflect = [&](Point2 at, Vec2 v) {
            Vec2 nn = (C - at).normalized();
            return v - 2.0 * v.dot(nn) * nn;
        };
        Vec2 o1 = reflect(P, u_minus), o2 = reflect(P2, v2);
        // intersect P + a o1 = P2 + b o2
        Vec2 rhs = P2 - P;
        double a = rhs.cross(o2) / o1.cross(o2);
        double f_measured = a;  // signed along the outgoing (inward) ray
        FocalCoord fp = mirror_reflect(FocalCoord::of(-d_src), k, alpha);
        CHECK(std::abs(f_measured - fp.value()) / std::abs(fp.value()) < 1e-4);
    }
    SUBCASE("cross-multiplied residual on random inputs") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 20000; ++i) {
            double k = u(rng) * 2;
            double alpha = u(rng) * 1.4;
            FocalCoord fm = FocalCoord::make(u(rng), u(rng));
            FocalCoord fp = mirror_reflect(fm, k, alpha);
            if (std::abs(fm.num) > 1e-6 && std::abs(fp.num) > 1e-6) {
                double r = -fm.den / fm.num + fp.den / fp.num - 2 * k / std::cos(alpha);
                CHECK(std::abs(r) < 1e-10 * std::max(1.0, std::abs(2 * k / std::cos(alpha))));
            }
        }
    }
}

TEST_CASE("free flight") {
    CHECK(free_flight(FocalCoord::of(0.0), 3.0).value() == doctest::Approx(-3.0));
    CHECK(free_flight(FocalCoord::infinity(), 5.0).is_infinite());
    // composing flights and flat reflections telescopes to one flight
    FocalCoord f = FocalCoord::of(0.7);
    FocalCoord g = f;
    double total = 0;
    for (double tau : {0.5, 1.25, 2.0, 0.125}) {
        g = free_flight(g, tau);
        g = mirror_reflect(g, 0.0, 0.3);  // flat bounce
        total += tau;
    }
    CHECK(proj_dist(g, free_flight(f, total)) < 1e-12);
}

TEST_CASE("beta dictionary") {
    double kf = 0.03;
    CHECK(focal_of_beta(Beta::of(2.0), 0.0, kf).value() == doctest::Approx(1.0 / kf));
    CHECK(focal_of_beta(Beta::of(4.0), 0.4, kf).value() ==
          doctest::Approx(std::cos(0.4) / (2 * kf)));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        double beta = u(rng) * 10;
        if (std::abs(beta) < 0.05) continue;
        double alpha = u(rng) * 1.5, k = u(rng) * 2;
        if (std::abs(k) < 1e-3) continue;
        FocalCoord f = focal_of_beta(Beta::of(beta), alpha, k);
        Beta back = beta_of_focal(f, alpha, k);
        REQUIRE(back.kind == Beta::finite);
        CHECK(std::abs(back.value - beta) < 1e-12 * std::max(1.0, std::abs(beta)));
    }
    // symbolic ends
    CHECK(focal_of_beta(Beta::zplus(), 0.1, 0.5).is_infinite());
    CHECK(focal_of_beta(Beta::inf(), 0.1, 0.5).value() == 0.0);
    CHECK(beta_of_focal(FocalCoord::of(0.0), 0.1, 0.5).kind == Beta::infinite);
    CHECK(beta_of_focal(FocalCoord::infinity(), 0.1, 0.5).kind == Beta::zero_plus);
    CHECK_THROWS_AS(focal_of_beta(Beta::of(2.0), 0.0, 0.0), FlatPointError);
}

TEST_CASE("beta reflection law") {
    CHECK(beta_reflect(Beta::of(2.0), 1.0).value == doctest::Approx(2.0));
    CHECK(beta_reflect(Beta::zplus(), 1.0).value == doctest::Approx(4.0));
    CHECK(beta_reflect(Beta::of(-2.0), -1.0).value == doctest::Approx(-2.0));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        double beta = u(rng) * 10, k = u(rng) * 2, alpha = u(rng) * 1.4;
        if (std::abs(beta) < 0.05 || std::abs(k) < 1e-3) continue;
        // involution
        Beta b1 = beta_reflect(Beta::of(beta), k);
        if (b1.kind == Beta::finite) {
            Beta b2 = beta_reflect(b1, k);
            CHECK(b2.value == doctest::Approx(beta).epsilon(1e-12));
        }
        // conjugation by the focal dictionary reproduces the mirror equation:
        // f- of D_beta is -focal_of_beta(beta)
        FocalCoord fminus = FocalCoord::make(-focal_of_beta(Beta::of(beta), alpha, k).num,
                                             focal_of_beta(Beta::of(beta), alpha, k).den);
        FocalCoord via_mirror = mirror_reflect(fminus, k, alpha);
        FocalCoord via_beta = focal_of_beta(beta_reflect(Beta::of(beta), k), alpha, k);
        CHECK(proj_dist(via_mirror, via_beta) < 1e-12);
    }
}

TEST_CASE("interval propagation") {
    SUBCASE("translation by a flat flight") {
        ProjInterval I = ProjInterval::of(FocalCoord::of(-1.0), FocalCoord::of(0.0));
        ProjInterval J = I.map(Mobius::flight(2.0));
        CHECK(J.lo.value() == doctest::Approx(-3.0));
        CHECK(J.hi.value() == doctest::Approx(-2.0));
    }
    SUBCASE("degenerate interval stays a point") {
        ProjInterval I = ProjInterval::point(FocalCoord::of(0.0));
        Mobius m = Mobius::flight(1.7).then(Mobius::mirror(0.8, 0.2));
        ProjInterval J = I.map(m);
        CHECK(J.width() < 1e-14);
        CHECK(proj_dist(J.lo, m.apply(FocalCoord::of(0.0))) < 1e-14);
    }
    SUBCASE("dense sampling containment oracle") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int rep = 0; rep < 2000; ++rep) {
            FocalCoord a = FocalCoord::make(u(rng), u(rng));
            double w = std::abs(u(rng)) * 2.0 + 1e-3;
            // interval as [a, a + w] in chart angle
            double psi = a.angle() + w;
            FocalCoord b = FocalCoord::make(std::sin(psi), std::cos(psi));
            ProjInterval I = ProjInterval::of(a, b);
            Mobius m = Mobius::flight(std::abs(u(rng)) * 3)
                           .then(Mobius::mirror(u(rng) * 1.5, u(rng) * 1.2));
            REQUIRE(m.det() > 0);
            ProjInterval J = I.map(m);
            for (int k = 0; k <= 100; ++k) {
                double p = a.angle() + w * k / 100.0;
                FocalCoord f = FocalCoord::make(std::sin(p), std::cos(p));
                CHECK(J.contains(m.apply(f), 1e-10));
            }
            // both images of the endpoints are the interval's ends
            CHECK(proj_dist(J.lo, m.apply(a)) < 1e-12);
            CHECK(proj_dist(J.hi, m.apply(b)) < 1e-12);
        }
    }
    SUBCASE("pole crossing wraps through infinity") {
        // interval straddling the mirror pole maps across infinity
        ProjInterval I = ProjInterval::of(FocalCoord::of(-2.0), FocalCoord::of(-0.5));
        Mobius m = Mobius::mirror(0.5, 0.0);  // pole at f- = -1
        ProjInterval J = I.map(m);
        CHECK(J.contains(FocalCoord::infinity(), 1e-12));
    }
}

TEST_CASE("containment margins in the chart angle") {
    ProjInterval target = ProjInterval::of(FocalCoord::of(-1.0), FocalCoord::of(0.0));
    ProjInterval inside = ProjInterval::of(FocalCoord::of(-0.8), FocalCoord::of(-0.2));
    ProjInterval outside = ProjInterval::of(FocalCoord::of(-1.2), FocalCoord::of(-0.2));
    CHECK(target.containment_margin(inside) > 0);
    CHECK(target.containment_margin(target) == doctest::Approx(0.0));
    CHECK(target.containment_margin(outside) < 0);
}
