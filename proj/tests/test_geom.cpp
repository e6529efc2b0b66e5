#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tess/delaunay.hpp"
#include "tess/errors.hpp"
#include "tess/geom.hpp"

using namespace tess;

TEST_CASE("orient2d signs") {
    CHECK(orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
    CHECK(orient2d({0, 0}, {1, 1}, {2, 2}) == 0);
    CHECK(orient2d({0, 0}, {0, 1}, {1, 0}) == -1);
}

TEST_CASE("incircle signs and degeneracy") {
    const Point2 a{0, 0}, b{1, 0}, c{0, 1};
    CHECK(incircle(a, b, c, {0.3, 0.3}) == 1);
    CHECK(incircle(a, b, c, {1, 1}) == 0);
    CHECK(incircle(a, b, c, {5, 5}) == -1);
    CHECK_THROWS_AS(incircle({0, 0}, {1, 1}, {2, 2}, {0, 1}), DegenerateTriangle);
}

TEST_CASE("incircle flips with orientation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)}, d{u(rng), u(rng)};
        if (orient2d(a, b, c) == 0) continue;
        CHECK(incircle(a, b, c, d) == -incircle(b, a, c, d));
    }
}

TEST_CASE("circumcircle") {
    const Circle r = circumcircle({0, 0}, {2, 0}, {0, 2});
    CHECK(r.center.x == rel(1.0));
    CHECK(r.center.y == rel(1.0));
    CHECK(r.radius == rel(std::sqrt(2.0)));

    const Circle e = circumcircle({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
    CHECK(e.radius == rel(1.0 / std::sqrt(3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(circumcircle({0, 0}, {1, 1}, {3, 3}), DegenerateTriangle);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 10000; ++k) {
        Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        if (orient2d(a, b, c) == 0) continue;
        const Circle cc = circumcircle(a, b, c);
        const double tol = 1e-10 * (1.0 + cc.radius);
        CHECK(std::abs(dist(cc.center, a) - cc.radius) <= tol);
        CHECK(std::abs(dist(cc.center, b) - cc.radius) <= tol);
        CHECK(std::abs(dist(cc.center, c) - cc.radius) <= tol);
    }
}

TEST_CASE("triangle and polygon areas") {
    CHECK(triangle_area({0, 0}, {1, 0}, {0, 1}) == rel(0.5));
    CHECK(triangle_area({0, 0}, {1, 1}, {2, 2}) == 0.0);
    const double s = 3.0;
    CHECK(triangle_area({0, 0}, {s, 0}, {s / 2, s * std::sqrt(3.0) / 2}) == rel(std::sqrt(3.0) / 4 * s * s));

    CHECK(convex_polygon_area({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}) == rel(1.0));
    CHECK(convex_polygon_area({{{0, 0}, {1, 0}, {0, 1}}}) == rel(0.5));
    ConvexPolygon hex;
    for (int k = 0; k < 6; ++k)
        hex.vertices.push_back({std::cos(k * std::numbers::pi / 3), std::sin(k * std::numbers::pi / 3)});
    CHECK(hex.is_strictly_convex());
    CHECK(convex_polygon_area(hex) == rel(3.0 * std::sqrt(3.0) / 2));
    CHECK_THROWS_AS(convex_polygon_area({{{0, 0}, {1, 0}}}), InvalidPolygon);
}

TEST_CASE("two-disk union") {
    const double pi = std::numbers::pi;
    CHECK(two_disk_union_area({{0, 0}, 2.0}, {{0, 0}, 2.0}) == rel(4 * pi));
    CHECK(two_disk_union_area({{0, 0}, 1.0}, {{5, 0}, 2.0}) == rel(5 * pi));
    // Equal radii 2v, unit separation.
    CHECK(two_disk_union_area({{0, 0}, 0.5}, {{1, 0}, 0.5}) == rel(pi / 2));
    const double a2 = 8.0 * std::acos(0.25) - std::sqrt(15.0) / 2.0;
    CHECK(two_disk_union_area({{0, 0}, 2.0}, {{1, 0}, 2.0}) == rel(8 * pi - a2).epsilon(1e-12));
    CHECK(lens_area(2.0, 2.0, 1.0) == rel(a2).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int k = 0; k < 2000; ++k) {
        const Circle c1{{u(rng), u(rng)}, u(rng)}, c2{{u(rng), u(rng)}, u(rng)};
        const double a = two_disk_union_area(c1, c2);
        CHECK(a == rel(two_disk_union_area(c2, c1)).epsilon(1e-12));
        CHECK(a <= pi * (c1.radius * c1.radius + c2.radius * c2.radius) * (1 + 1e-12));
        CHECK(a >= pi * std::max(c1.radius * c1.radius, c2.radius * c2.radius) * (1 - 1e-12));
        Circle bigger = c1;
        bigger.radius += 0.1;
        CHECK(two_disk_union_area(bigger, c2) >= a - 1e-12);
    }
}

TEST_CASE("disk union agrees with pairwise formula and with sampling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int k = 0; k < 500; ++k) {
        const Circle c[2] = {{{u(rng), u(rng)}, u(rng) + 0.01}, {{u(rng), u(rng)}, u(rng) + 0.01}};
        CHECK(disk_union_area(c) == rel(two_disk_union_area(c[0], c[1])).epsilon(1e-9));
    }
    const Circle c[4] = {{{0, 0}, 1.0}, {{1, 0}, 0.8}, {{0.5, 0.9}, 0.7}, {{0.3, 0.2}, 0.2}};
    std::uniform_real_distribution<double> bx(-1.0, 1.8), by(-1.0, 1.6);
    const int n = 400000;
    int hit = 0;
    for (int k = 0; k < n; ++k) {
        const Point2 p{bx(rng), by(rng)};
        for (const auto& d : c)
            if (dist2(p, d.center) < d.radius * d.radius) {
                ++hit;
                break;
            }
    }
    const double box = 2.8 * 2.6;
    const double est = box * hit / n;
    const double se = box * std::sqrt(static_cast<double>(hit) / n * (1.0 - static_cast<double>(hit) / n) / n);
    CHECK(std::abs(disk_union_area(c) - est) < 4 * se);
}

TEST_CASE("union bound on triangle pairs") {
    const double R = 1.0;
    Triangle2 t1, t2;
    for (int k = 0; k < 3; ++k) {
        const double a = 2 * std::numbers::pi * k / 3 + std::numbers::pi / 2;
        t1[k] = {R * std::cos(a), R * std::sin(a)};
        t2[k] = {5.0 + R * std::cos(a), R * std::sin(a)};
    }
    CHECK(two_triangle_union_bound_check(t1, t2));
    CHECK_THROWS_AS(two_triangle_union_bound_check(t1, t1), HypothesisViolation);
    // A vertex of t2 strictly inside the circumdisk of t1.
    Triangle2 t3 = t2;
    t3[0] = {0.1, 0.1};
    CHECK_THROWS_AS(two_triangle_union_bound_check(t1, t3), HypothesisViolation);
}

namespace {

// Random admissible pairs: triangles of one Delaunay triangulation have mutually
// empty circumdisks, so any pair of them qualifies once ordered by R.
std::size_t union_bound_violations(std::size_t pairs, std::uint64_t seed, std::size_t& checked) {
    std::mt19937_64 rng(seed);
    std::size_t bad = 0;
    checked = 0;
    while (checked < pairs) {
        std::uniform_real_distribution<double> u(0.0, 10.0);
        std::vector<Point2> pts(300);
        for (auto& p : pts) p = {u(rng), u(rng)};
        const Triangulation t = triangulate(pts, TriangulateOptions{rng(), false});
        const int m = static_cast<int>(t.triangles.size());
        std::uniform_int_distribution<int> pick(0, m - 1);
        for (int k = 0; k < 2000 && checked < pairs; ++k) {
            int i = pick(rng), j;
            // Favour close pairs, where the bound is tight.
            if (k % 2 == 0) {
                j = t.triangles[i].nb[k % 3];
                if (j < 0) continue;
            } else {
                j = pick(rng);
                if (j == i) continue;
            }
            Triangle2 a{t.vertex(i, 0), t.vertex(i, 1), t.vertex(i, 2)};
            Triangle2 b{t.vertex(j, 0), t.vertex(j, 1), t.vertex(j, 2)};
            if (t.circumcircle_of(i).radius < t.circumcircle_of(j).radius) std::swap(a, b);
            try {
                if (!two_triangle_union_bound_check(a, b)) ++bad;
                ++checked;
            } catch (const HypothesisViolation&) {
            }
        }
    }
    return bad;
}

}  // namespace

TEST_CASE("union bound holds on 1e5 admissible random pairs") {
    std::size_t checked = 0;
    CHECK(union_bound_violations(100000, 99, checked) == 0);
    CHECK(checked == 100000);
}
