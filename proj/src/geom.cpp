#include "tess/geom.hpp"

#include <algorithm>
#include <numbers>

#include "tess/errors.hpp"

namespace tess {

namespace {

constexpr double kEps = 1e-12;

int sign_with_band(double det, double scale) {
    if (std::abs(det) <= kEps * scale) return 0;
    return det > 0 ? 1 : -1;
}

}  // namespace

bool ConvexPolygon::is_strictly_convex() const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (orient2d(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0) return false;
    }
    return true;
}

double orient2d_det(Point2 a, Point2 b, Point2 c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int orient2d(Point2 a, Point2 b, Point2 c) {
    const double l = (b.x - a.x) * (c.y - a.y);
    const double r = (b.y - a.y) * (c.x - a.x);
    return sign_with_band(l - r, std::abs(l) + std::abs(r));
}

int incircle_unchecked(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double bc = bdx * cdy - bdy * cdx;
    const double ca = cdx * ady - cdy * adx;
    const double ab = adx * bdy - ady * bdx;
    const double det = alift * bc + blift * ca + clift * ab;
    const double perm = alift * (std::abs(bdx * cdy) + std::abs(bdy * cdx)) +
                        blift * (std::abs(cdx * ady) + std::abs(cdy * adx)) +
                        clift * (std::abs(adx * bdy) + std::abs(ady * bdx));
    return sign_with_band(det, perm);
}

int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
    if (orient2d(a, b, c) == 0) throw DegenerateTriangle("incircle: collinear triangle");
    return incircle_unchecked(a, b, c, d);
}

Point2 circumcenter(Point2 a, Point2 b, Point2 c) {
    const Point2 ba = b - a, ca = c - a;
    const double den = 2.0 * cross(ba, ca);
    const double b2 = norm2(ba), c2 = norm2(ca);
    return {a.x + (ca.y * b2 - ba.y * c2) / den, a.y + (ba.x * c2 - ca.x * b2) / den};
}

Circle circumcircle(Point2 a, Point2 b, Point2 c) {
    if (orient2d(a, b, c) == 0) throw DegenerateTriangle("circumcircle: collinear points");
    const Point2 z = circumcenter(a, b, c);
    return {z, dist(z, a)};
}

double triangle_area(Point2 a, Point2 b, Point2 c) {
    return 0.5 * std::abs(orient2d_det(a, b, c));
}

double convex_polygon_area(const ConvexPolygon& p) {
    const auto& v = p.vertices;
    if (v.size() < 3) throw InvalidPolygon("polygon needs at least 3 vertices");
    double s = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
    return 0.5 * std::abs(s);
}

double lens_area(double r1, double r2, double d) {
    if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
    if (d >= r1 + r2 || std::abs(d - (r1 + r2)) < 1e-12) return 0.0;
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        return std::numbers::pi * r * r;
    }
    const double c1 = std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0);
    const double c2 = std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0);
    const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    return r1 * r1 * std::acos(c1) + r2 * r2 * std::acos(c2) - 0.5 * std::sqrt(std::max(k, 0.0));
}

double two_disk_union_area(const Circle& c1, const Circle& c2) {
    const double pi = std::numbers::pi;
    return pi * c1.radius * c1.radius + pi * c2.radius * c2.radius -
           lens_area(c1.radius, c2.radius, dist(c1.center, c2.center));
}

double disk_union_area(std::span<const Circle> disks) {
    const std::size_t n = disks.size();
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<char> skip(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (disks[i].radius <= 0.0) { skip[i] = 1; continue; }
        for (std::size_t j = 0; j < n && !skip[i]; ++j) {
            if (j == i || disks[j].radius <= 0.0) continue;
            const double d = dist(disks[i].center, disks[j].center);
            const double tol = 1e-14 * (disks[i].radius + disks[j].radius);
            const bool same = d <= tol && std::abs(disks[i].radius - disks[j].radius) <= tol;
            if (same ? j < i : d + disks[i].radius <= disks[j].radius) skip[i] = 1;
        }
    }

    double area = 0.0;
    std::vector<double> angles;
    for (std::size_t i = 0; i < n; ++i) {
        if (skip[i]) continue;
        const Circle& ci = disks[i];
        angles.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || skip[j]) continue;
            const Circle& cj = disks[j];
            const double d = dist(ci.center, cj.center);
            if (d >= ci.radius + cj.radius || d <= std::abs(ci.radius - cj.radius)) continue;
            const double phi = std::atan2(cj.center.y - ci.center.y, cj.center.x - ci.center.x);
            const double ca = std::clamp(
                (ci.radius * ci.radius + d * d - cj.radius * cj.radius) / (2.0 * ci.radius * d), -1.0, 1.0);
            const double alpha = std::acos(ca);
            for (double a : {phi - alpha, phi + alpha}) {
                a = std::fmod(a, two_pi);
                if (a < 0) a += two_pi;
                angles.push_back(a);
            }
        }
        std::sort(angles.begin(), angles.end());
        if (angles.empty()) angles.push_back(0.0);
        const std::size_t m = angles.size();
        for (std::size_t k = 0; k < m; ++k) {
            const double a0 = angles[k];
            const double a1 = (k + 1 < m) ? angles[k + 1] : angles[0] + two_pi;
            if (a1 - a0 <= 0.0) continue;
            const double mid = 0.5 * (a0 + a1);
            const Point2 p{ci.center.x + ci.radius * std::cos(mid), ci.center.y + ci.radius * std::sin(mid)};
            bool covered = false;
            for (std::size_t j = 0; j < n && !covered; ++j) {
                if (j == i || skip[j]) continue;
                covered = dist2(p, disks[j].center) < disks[j].radius * disks[j].radius;
            }
            if (covered) continue;
            // Green: 1/2 * integral of (x dy - y dx) along the arc.
            const double r = ci.radius;
            area += 0.5 * (r * r * (a1 - a0) + r * ci.center.x * (std::sin(a1) - std::sin(a0)) -
                           r * ci.center.y * (std::cos(a1) - std::cos(a0)));
        }
    }
    return area;
}

namespace {

Triangle2 ccw(const Triangle2& t) {
    const int o = orient2d(t[0], t[1], t[2]);
    if (o == 0) throw HypothesisViolation("triangle is degenerate");
    return o > 0 ? t : Triangle2{t[0], t[2], t[1]};
}

}  // namespace

bool two_triangle_union_bound_check(const Triangle2& t1, const Triangle2& t2) {
    const Triangle2 a = ccw(t1), b = ccw(t2);
    const Circle ca = circumcircle(a[0], a[1], a[2]);
    const Circle cb = circumcircle(b[0], b[1], b[2]);
    const double tol = 1e-12 * (ca.radius + cb.radius);
    if (dist(ca.center, cb.center) <= tol && std::abs(ca.radius - cb.radius) <= tol)
        throw HypothesisViolation("triangles share their circumdisk");
    for (const Point2& p : b)
        if (incircle_unchecked(a[0], a[1], a[2], p) > 0)
            throw HypothesisViolation("vertex of second triangle inside first circumdisk");
    for (const Point2& p : a)
        if (incircle_unchecked(b[0], b[1], b[2], p) > 0)
            throw HypothesisViolation("vertex of first triangle inside second circumdisk");
    if (ca.radius < cb.radius * (1.0 - 1e-12))
        throw HypothesisViolation("first circumradius must be the larger one");

    const double lhs = two_disk_union_area(ca, cb);
    const double rhs = (std::numbers::pi / 2.0 - 1.0) * ca.radius * ca.radius +
                       triangle_area(a[0], a[1], a[2]) + triangle_area(b[0], b[1], b[2]);
    return lhs >= rhs - 1e-9;
}

}  // namespace tess
