#include "tess/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tess/errors.hpp"
#include "tess/point_process.hpp"

namespace tess {

std::optional<ConvexPolygon> voronoi_cell(const Triangulation& t, int site) {
    std::vector<int> fan;
    if (!t.incident_ccw(site, fan)) return std::nullopt;
    ConvexPolygon p;
    p.vertices.reserve(fan.size());
    for (int tri : fan) p.vertices.push_back(t.circumcircle_of(tri).center);
    return p;
}

ConvexPolygon voronoi_cell_strict(const Triangulation& t, int site) {
    auto p = voronoi_cell(t, site);
    if (!p) throw UnboundedCell("site lies on the convex hull");
    return std::move(*p);
}

std::vector<int> delaunay_neighbors(const Triangulation& t, int site) {
    std::vector<int> fan, out;
    const bool closed = t.incident_ccw(site, fan);
    for (int tri : fan) {
        const Tri& T = t.triangles[tri];
        int k = 0;
        while (T.v[k] != site) ++k;
        out.push_back(T.v[(k + 1) % 3]);
    }
    if (!closed && !fan.empty()) {
        const Tri& T = t.triangles[fan.back()];
        int k = 0;
        while (T.v[k] != site) ++k;
        out.push_back(T.v[(k + 2) % 3]);
    }
    return out;
}

int neighbor_count(const Triangulation& t, int site) {
    return static_cast<int>(delaunay_neighbors(t, site).size());
}

double farthest_neighbor_distance(const Triangulation& t, int site) {
    std::vector<int> fan;
    if (!t.incident_ccw(site, fan)) throw UnboundedCell("farthest neighbour of a hull site");
    double best = 0.0;
    for (int s : delaunay_neighbors(t, site)) best = std::max(best, dist(t.sites[site], t.sites[s]));
    return best;
}

double neighbor_inradius(const Triangulation& t, int site) {
    double best = std::numeric_limits<double>::infinity();
    for (int s : delaunay_neighbors(t, site)) best = std::min(best, dist(t.sites[site], t.sites[s]));
    return 0.5 * best;
}

namespace {

std::vector<Circle> flower_disks(const ConvexPolygon& cell, Point2 site) {
    std::vector<Circle> disks;
    disks.reserve(cell.vertices.size());
    for (const Point2& v : cell.vertices) disks.push_back({v, dist(v, site)});
    return disks;
}

}  // namespace

McEstimate flower_volume(const ConvexPolygon& cell, Point2 site, std::size_t mc_points, std::uint64_t seed) {
    if (mc_points < 1000) throw PrecisionError("flower Monte Carlo needs at least 1000 points");
    if (cell.vertices.size() < 3) throw InvalidPolygon("flower of a degenerate cell");
    const auto disks = flower_disks(cell, site);
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (const Circle& c : disks) {
        x0 = std::min(x0, c.center.x - c.radius);
        x1 = std::max(x1, c.center.x + c.radius);
        y0 = std::min(y0, c.center.y - c.radius);
        y1 = std::max(y1, c.center.y + c.radius);
    }
    std::mt19937_64 rng(seed);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < mc_points; ++i) {
        const Point2 p{x0 + (x1 - x0) * uniform01(rng), y0 + (y1 - y0) * uniform01(rng)};
        for (const Circle& c : disks)
            if (dist2(p, c.center) < c.radius * c.radius) {
                ++hits;
                break;
            }
    }
    const double box = (x1 - x0) * (y1 - y0);
    const double f = static_cast<double>(hits) / static_cast<double>(mc_points);
    return {box * f, box * std::sqrt(f * (1.0 - f) / static_cast<double>(mc_points))};
}

double flower_area(const ConvexPolygon& cell, Point2 site) {
    if (cell.vertices.size() < 3) throw InvalidPolygon("flower of a degenerate cell");
    const auto disks = flower_disks(cell, site);
    return disk_union_area(disks);
}

std::vector<VoronoiCellRecord> voronoi_cells_in_window(const Triangulation& t, const Region& window,
                                                       const VoronoiOptions& opt) {
    std::vector<VoronoiCellRecord> out;
    std::vector<int> fan;
    const double m = 0.5 * opt.margin;
    for (int s = 0; s < static_cast<int>(t.sites.size()); ++s) {
        const Point2 x = t.sites[s];
        if (!window.in_core(x)) continue;
        VoronoiCellRecord r;
        r.site = s;
        r.nucleus = x;
        r.bounded = t.incident_ccw(s, fan);
        if (r.bounded) {
            r.polygon.vertices.reserve(fan.size());
            for (int tri : fan) {
                const Point2 z = t.circumcircle_of(tri).center;
                if (z.x < window.lower[0] - m || z.x > window.upper[0] + m || z.y < window.lower[1] - m ||
                    z.y > window.upper[1] + m)
                    r.bounded = false;
                r.polygon.vertices.push_back(z);
            }
        }
        const auto nbrs = delaunay_neighbors(t, s);
        r.neighbors = static_cast<int>(nbrs.size());
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int q : nbrs) {
            const double d = dist(x, t.sites[q]);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        r.inradius = 0.5 * lo;
        r.farthest = hi;
        if (r.bounded && opt.flower) r.flower = flower_area(r.polygon, x);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace tess
