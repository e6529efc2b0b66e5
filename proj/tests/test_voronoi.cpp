#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "test_util.hpp"
#include "tess/errors.hpp"
#include "tess/experiment.hpp"
#include "tess/voronoi.hpp"

using namespace tess;

namespace {

// Brute-force Voronoi cell: clip a large box by every bisector half-plane. Each
// polygon edge remembers the site whose bisector produced it (-1 for the box).
struct OracleCell {
    std::vector<Point2> v;
    std::vector<int> label;  // label[k] belongs to edge v[k] -> v[k+1]
};

OracleCell oracle_cell(const std::vector<Point2>& sites, int i, double box) {
    OracleCell c;
    c.v = {{-box, -box}, {box, -box}, {box, box}, {-box, box}};
    c.label = {-1, -1, -1, -1};
    const Point2 x = sites[i];
    for (int j = 0; j < static_cast<int>(sites.size()); ++j) {
        if (j == i) continue;
        const Point2 n = sites[j] - x;
        const double off = 0.5 * (norm2(sites[j]) - norm2(x));
        // Keep points p with n.p <= off.
        OracleCell out;
        const std::size_t m = c.v.size();
        for (std::size_t k = 0; k < m; ++k) {
            const Point2 p = c.v[k], q = c.v[(k + 1) % m];
            const double fp = dot(n, p) - off, fq = dot(n, q) - off;
            if (fp <= 0) {
                out.v.push_back(p);
                out.label.push_back(c.label[k]);
            }
            if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
                const double s = fp / (fp - fq);
                out.v.push_back(p + s * (q - p));
                out.label.push_back(fp < 0 ? j : c.label[k]);
            }
        }
        c = std::move(out);
    }
    return c;
}

}  // namespace

TEST_CASE("square plus centre") {
    const std::vector<Point2> pts{{0, 0}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    const Triangulation t = triangulate(pts);
    const auto cell = voronoi_cell(t, 0);
    REQUIRE(cell.has_value());
    CHECK(cell->vertices.size() == 4);
    CHECK(convex_polygon_area(*cell) == rel(2.0));
    for (const auto& v : cell->vertices) CHECK(std::hypot(v.x, v.y) == rel(1.0));
    CHECK(neighbor_count(t, 0) == 4);
    CHECK(farthest_neighbor_distance(t, 0) == rel(std::sqrt(2.0)));
    CHECK(neighbor_inradius(t, 0) == rel(std::sqrt(2.0) / 2));
    CHECK_FALSE(voronoi_cell(t, 1).has_value());
    CHECK_THROWS_AS(voronoi_cell_strict(t, 1), UnboundedCell);
    CHECK_THROWS_AS(farthest_neighbor_distance(t, 1), UnboundedCell);
    // Square cell of half-diagonal 1: flower is at least the disk through the far vertex.
    CHECK(flower_area(*cell, {0, 0}) >= std::numbers::pi - 1e-12);
}

TEST_CASE("duality against the half-plane oracle") {
    const PointSample s = sample_poisson(Region::cube(2, 30.0), 1.0, 21);
    REQUIRE(s.size() <= 1000);
    const auto pts = s.points2();
    const Triangulation t = triangulate(s);
    int bounded = 0;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const OracleCell o = oracle_cell(pts, i, 1e4);
        const bool touches_box = std::find(o.label.begin(), o.label.end(), -1) != o.label.end();
        const auto cell = voronoi_cell(t, i);
        CHECK(cell.has_value() == !touches_box);
        if (!cell) continue;
        ++bounded;
        std::set<int> from_oracle;
        for (std::size_t k = 0; k < o.v.size(); ++k)
            if (dist(o.v[k], o.v[(k + 1) % o.v.size()]) > 1e-9) from_oracle.insert(o.label[k]);
        const auto nb = delaunay_neighbors(t, i);
        CHECK(std::set<int>(nb.begin(), nb.end()) == from_oracle);
        double area = 0.0;
        for (std::size_t k = 0; k < o.v.size(); ++k) area += cross(o.v[k], o.v[(k + 1) % o.v.size()]);
        CHECK(convex_polygon_area(*cell) == rel(0.5 * area).epsilon(1e-9));
        // Every vertex is equidistant to the site and at least two others.
        for (const auto& v : cell->vertices) {
            const double r = dist(v, pts[i]);
            int ties = 0;
            for (int j : nb)
                if (std::abs(dist(v, pts[j]) - r) < 1e-8 * (1 + r)) ++ties;
            CHECK(ties >= 2);
        }
    }
    CHECK(bounded > 700);
}

TEST_CASE("per-cell functionals agree and satisfy the chain inequality") {
    const PointSample s = sample_poisson(Region::cube(2, 40.0, 8.0), 1.0, 33);
    const Triangulation t = triangulate(s);
    const auto cells = voronoi_cells_in_window(t, Region::cube(2, 40.0), {true, 8.0});
    REQUIRE(cells.size() > 1400);
    std::size_t checked = 0;
    for (const auto& c : cells) {
        CHECK(c.inradius == rel(inradius(s, static_cast<std::size_t>(c.site))).epsilon(1e-12));
        if (!c.bounded) continue;
        CHECK(c.neighbors >= 3);
        CHECK(c.farthest >= 2 * c.inradius - 1e-12);
        double far_vertex = 0.0;
        for (const auto& v : c.polygon.vertices) far_vertex = std::max(far_vertex, dist(v, c.nucleus));
        const double kappa = std::numbers::pi;
        CHECK(0.25 * kappa * c.farthest * c.farthest <= kappa * far_vertex * far_vertex * (1 + 1e-12));
        CHECK(kappa * far_vertex * far_vertex <= c.flower * (1 + 1e-12));
        if (checked < 50) {
            const McEstimate mc = flower_volume(c.polygon, c.nucleus, 20000, 1000 + checked);
            CHECK(kappa * far_vertex * far_vertex <= mc.value + 3 * mc.se);
            CHECK(std::abs(mc.value - c.flower) <= 5 * mc.se + 1e-9);
        }
        ++checked;
    }
    CHECK_THROWS_AS(flower_volume(cells.front().polygon, cells.front().nucleus, 999, 1), PrecisionError);
}

TEST_CASE("vertex balls cover the full flower") {
    const PointSample s = sample_poisson(Region::cube(2, 20.0, 6.0), 1.0, 44);
    const Triangulation t = triangulate(s);
    std::mt19937_64 rng(4);
    int cells = 0;
    std::size_t probes = 0, vertex_only = 0, dense_only = 0;
    for (int i = 0; i < static_cast<int>(t.sites.size()) && cells < 100; ++i) {
        const auto cell = voronoi_cell(t, i);
        if (!cell || !Region::cube(2, 20.0).in_core(t.sites[i])) continue;
        ++cells;
        const Point2 x = t.sites[i];
        // Dense y over the cell: interior by rejection, plus edge points away from the vertices.
        std::vector<Point2> ys;
        double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300, reach = 0.0;
        for (const auto& v : cell->vertices) {
            lo_x = std::min(lo_x, v.x), hi_x = std::max(hi_x, v.x);
            lo_y = std::min(lo_y, v.y), hi_y = std::max(hi_y, v.y);
            reach = std::max(reach, dist(v, x));
        }
        std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y), u01(0.0, 1.0);
        const auto& vs = cell->vertices;
        while (ys.size() < 2000) {
            const Point2 y{ux(rng), uy(rng)};
            bool inside = true;
            for (std::size_t k = 0; k < vs.size() && inside; ++k)
                inside = orient2d_det(vs[k], vs[(k + 1) % vs.size()], y) > 0;
            if (inside) ys.push_back(y);
        }
        for (std::size_t k = 0; k < vs.size(); ++k)
            for (int m = 1; m < 200; ++m) ys.push_back(vs[k] + (m / 200.0) * (vs[(k + 1) % vs.size()] - vs[k]));
        std::uniform_real_distribution<double> px(x.x - 2 * reach, x.x + 2 * reach), py(x.y - 2 * reach, x.y + 2 * reach);
        for (int k = 0; k < 1000; ++k) {
            const Point2 p{px(rng), py(rng)};
            bool by_vertex = false, by_dense = false;
            for (const auto& v : vs) by_vertex = by_vertex || dist2(p, v) < dist2(v, x);
            for (const auto& y : ys)
                if (dist2(p, y) < dist2(y, x)) {
                    by_dense = true;
                    break;
                }
            ++probes;
            vertex_only += by_vertex && !by_dense;
            dense_only += by_dense && !by_vertex;
        }
    }
    CHECK(cells == 100);
    CHECK(probes == 100000);
    // Dense membership implies vertex membership; the reverse misses only a thin rim.
    CHECK(dense_only == 0);
    CHECK(static_cast<double>(vertex_only) / static_cast<double>(probes) < 0.01);
}

TEST_CASE("neighbour count statistics") {
    const NeighborPmf pmf = estimate_neighbor_pmf(100000, 2024, 1);
    CHECK(pmf.cells >= 100000);
    double mean = 0.0, total = 0.0;
    for (const auto& [k, p] : pmf.pmf) {
        mean += k * p;
        total += p;
    }
    CHECK(total == rel(1.0));
    CHECK(mean == rel(6.0).epsilon(0.01));
    const double p3 = pmf.pmf.count(3) ? pmf.pmf.at(3) : 0.0;
    CHECK(p3 > 0.009);
    CHECK(p3 < 0.014);
}
