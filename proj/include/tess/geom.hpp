#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace tess {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2, Point2) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm2(Point2 a) { return dot(a, a); }
inline double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
constexpr double dist2(Point2 a, Point2 b) { return norm2(a - b); }

struct Circle {
    Point2 center;
    double radius = 0.0;
};

using Triangle2 = std::array<Point2, 3>;

// Counterclockwise, strictly convex vertex chain.
struct ConvexPolygon {
    std::vector<Point2> vertices;

    bool is_strictly_convex() const;
};

// Raw determinant, twice the signed area of (a, b, c).
double orient2d_det(Point2 a, Point2 b, Point2 c);

// +1 counterclockwise, -1 clockwise, 0 collinear within the epsilon band.
int orient2d(Point2 a, Point2 b, Point2 c);

// +1 if d is strictly inside the circle through (a, b, c), 0 if cocircular,
// -1 outside. The sign flips with the orientation of (a, b, c).
// Throws DegenerateTriangle on collinear a, b, c.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

// Same test with the collinearity check skipped; caller guarantees a valid triangle.
int incircle_unchecked(Point2 a, Point2 b, Point2 c, Point2 d);

Circle circumcircle(Point2 a, Point2 b, Point2 c);
Point2 circumcenter(Point2 a, Point2 b, Point2 c);

double triangle_area(Point2 a, Point2 b, Point2 c);
double convex_polygon_area(const ConvexPolygon& p);

// Area of the intersection of two disks (lens).
double lens_area(double r1, double r2, double d);
double two_disk_union_area(const Circle& c1, const Circle& c2);

// Exact area of a finite union of disks, by boundary integration over the
// uncovered arcs.
double disk_union_area(std::span<const Circle> disks);

// Checks (pi/2 - 1) R1^2 + |t1| + |t2| <= |B(t1) u B(t2)| + 1e-9 for a pair of
// triangles with mutually empty circumdisks and R(t1) >= R(t2).
// Throws HypothesisViolation when the pair is not admissible.
bool two_triangle_union_bound_check(const Triangle2& t1, const Triangle2& t2);

}  // namespace tess
