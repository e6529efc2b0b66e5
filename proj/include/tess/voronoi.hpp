#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tess/delaunay.hpp"
#include "tess/geom.hpp"

namespace tess {

struct VoronoiCellRecord {
    int site = -1;
    Point2 nucleus;
    bool bounded = false;
    ConvexPolygon polygon;
    double inradius = 0.0;
    double farthest = 0.0;
    double flower = 0.0;
    int neighbors = 0;
};

// Circumcenters of the incident triangles in counterclockwise order; nullopt on the hull.
std::optional<ConvexPolygon> voronoi_cell(const Triangulation& t, int site);
// As above; throws UnboundedCell for a hull site.
ConvexPolygon voronoi_cell_strict(const Triangulation& t, int site);

// Delaunay-adjacent sites of `site`.
std::vector<int> delaunay_neighbors(const Triangulation& t, int site);
int neighbor_count(const Triangulation& t, int site);
// Throws UnboundedCell for a hull site.
double farthest_neighbor_distance(const Triangulation& t, int site);
// Half the distance to the closest Delaunay neighbour.
double neighbor_inradius(const Triangulation& t, int site);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Area of the union of the disks B(v, |v - site|) over the cell vertices, by
// uniform rejection sampling over the union's bounding box.
McEstimate flower_volume(const ConvexPolygon& cell, Point2 site, std::size_t mc_points, std::uint64_t seed);
// Same union, exact.
double flower_area(const ConvexPolygon& cell, Point2 site);

struct VoronoiOptions {
    bool flower = true;
    // Cells with a vertex farther than margin/2 outside the window are dropped
    // as unbounded-equivalent.
    double margin = 0.0;
};

// Cells whose site lies in the half-open core of `window`.
std::vector<VoronoiCellRecord> voronoi_cells_in_window(const Triangulation& t, const Region& window,
                                                       const VoronoiOptions& opt = {});

}  // namespace tess
