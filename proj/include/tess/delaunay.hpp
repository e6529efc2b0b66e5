#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tess/geom.hpp"
#include "tess/point_process.hpp"

namespace tess {

// nb[i] is the triangle across the edge opposite v[i], or -1 on the hull.
struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> nb{-1, -1, -1};
};

struct TriangulateOptions {
    // Seed of the insertion permutation; defaults to the sample's seed.
    std::uint64_t order_seed = 0;
    bool order_seed_from_sample = true;
    // Super-triangle size relative to the bounding-box diameter.
    double super_scale = 1e3;
};

class Triangulation {
public:
    std::vector<Point2> sites;
    std::vector<Tri> triangles;
    std::vector<int> site_triangle;  // one incident triangle per site, -1 if isolated
    Region region;
    std::uint64_t seed = 0;
    std::size_t jittered = 0;     // sites moved by the perturbation retry
    std::size_t hull_repairs = 0; // triangles restored along the hull

    Point2 vertex(int t, int k) const { return sites[triangles[t].v[k]]; }
    Circle circumcircle_of(int t) const;
    double area_of(int t) const;

    // Incident triangles of `site` in counterclockwise order. Returns false if
    // the fan is open (hull site); `out` then runs from one hull edge to the other.
    bool incident_ccw(int site, std::vector<int>& out) const;
};

Triangulation triangulate(const PointSample& sample, const TriangulateOptions& opt = {});
Triangulation triangulate(std::span<const Point2> points, const TriangulateOptions& opt = {});

struct DelaunayCellRecord {
    std::array<int, 3> vertices{};
    Point2 nucleus;
    double circumradius = 0.0;
    double area = 0.0;
};

// Triangles whose circumcenter lies in the half-open core of `window`.
std::vector<DelaunayCellRecord> delaunay_cells_in_window(const Triangulation& t, const Region& window);

enum class CellFunctional { R, Area, NegR, NegArea };

double cell_functional(const DelaunayCellRecord& c, CellFunctional f);

// Ordered pairs of distinct cells with nucleus in `cube` whose functional exceeds `threshold`.
long long empirical_neighbor_pairs(const Triangulation& t, const Region& cube, double threshold,
                                   CellFunctional f);

// Brute-force count of (site, triangle) pairs violating the empty-circumdisk property.
std::size_t audit_empty_circumdisk(const Triangulation& t);

// Checks adjacency symmetry; returns the number of inconsistent links.
std::size_t audit_adjacency(const Triangulation& t);

// Convex hull (counterclockwise, collinear points dropped).
ConvexPolygon convex_hull(std::span<const Point2> points);

}  // namespace tess
