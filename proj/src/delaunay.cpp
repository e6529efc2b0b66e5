#include "tess/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tess/errors.hpp"

namespace tess {

Circle Triangulation::circumcircle_of(int t) const {
    const Point2 a = vertex(t, 0), b = vertex(t, 1), c = vertex(t, 2);
    const Point2 z = circumcenter(a, b, c);
    return {z, dist(z, a)};
}

double Triangulation::area_of(int t) const {
    return triangle_area(vertex(t, 0), vertex(t, 1), vertex(t, 2));
}

namespace {

int index_of(const Tri& t, int v) {
    for (int k = 0; k < 3; ++k)
        if (t.v[k] == v) return k;
    return -1;
}

}  // namespace

bool Triangulation::incident_ccw(int site, std::vector<int>& out) const {
    out.clear();
    const int start = site_triangle[site];
    if (start < 0) return false;
    int t = start;
    // Rotate clockwise to the hull edge, if any.
    while (true) {
        const int k = index_of(triangles[t], site);
        const int prev = triangles[t].nb[(k + 2) % 3];
        if (prev < 0) break;
        t = prev;
        if (t == start) {
            // Closed fan.
            int u = start;
            do {
                out.push_back(u);
                const int j = index_of(triangles[u], site);
                u = triangles[u].nb[(j + 1) % 3];
            } while (u != start);
            return true;
        }
    }
    int u = t;
    while (u >= 0) {
        out.push_back(u);
        const int j = index_of(triangles[u], site);
        u = triangles[u].nb[(j + 1) % 3];
    }
    return false;
}

namespace {

class Builder {
public:
    Builder(std::vector<Point2> pts, std::uint64_t order_seed, double super_scale)
        : n_(pts.size()), pts_(std::move(pts)), rng_(order_seed) {
        if (n_ < 3) throw DegenerateInput("triangulation needs at least 3 sites");
        double x0 = pts_[0].x, x1 = x0, y0 = pts_[0].y, y1 = y0;
        for (const auto& p : pts_) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        lo_ = {x0, y0};
        hi_ = {x1, y1};
        diam_ = std::max(std::hypot(x1 - x0, y1 - y0), 1e-300);
        const Point2 c{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
        const double m = 2.0 * super_scale * diam_;
        const double s3 = std::sqrt(3.0) / 2.0;
        pts_.push_back({c.x, c.y + m});
        pts_.push_back({c.x - s3 * m, c.y - 0.5 * m});
        pts_.push_back({c.x + s3 * m, c.y - 0.5 * m});
        const int N = static_cast<int>(n_);
        tris_.push_back(Tri{{N, N + 1, N + 2}, {-1, -1, -1}});
        stamp_.push_back(0);
    }

    Triangulation run() {
        for (int i : insertion_order()) insert(i);
        return finish();
    }

private:
    std::vector<int> insertion_order() {
        std::vector<int> perm(n_);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng_);
        // Biased randomized rounds, each swept in serpentine grid order so that
        // consecutive insertions are close and the walk stays short.
        std::vector<std::size_t> ends;
        for (std::size_t e = n_; e > 64; e /= 2) ends.push_back(e);
        ends.push_back(std::min<std::size_t>(n_, 64));
        std::reverse(ends.begin(), ends.end());
        std::size_t begin = 0;
        const double w = std::max(hi_.x - lo_.x, 1e-300), h = std::max(hi_.y - lo_.y, 1e-300);
        std::vector<std::pair<std::uint64_t, int>> keyed;
        for (std::size_t end : ends) {
            if (end <= begin) continue;
            const std::size_t m = end - begin;
            const auto k = static_cast<std::uint64_t>(std::max(1.0, std::ceil(std::sqrt(m / 2.0))));
            keyed.clear();
            for (std::size_t i = begin; i < end; ++i) {
                const Point2 p = pts_[perm[i]];
                auto col = static_cast<std::uint64_t>(std::min<double>(k - 1, (p.x - lo_.x) / w * k));
                auto row = static_cast<std::uint64_t>(std::min<double>(k - 1, (p.y - lo_.y) / h * k));
                if (row & 1) col = k - 1 - col;
                keyed.emplace_back(row * k + col, perm[i]);
            }
            std::stable_sort(keyed.begin(), keyed.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t i = 0; i < m; ++i) perm[begin + i] = keyed[i].second;
            begin = end;
        }
        return perm;
    }

    int locate(Point2 p) {
        int t = last_;
        const std::size_t cap = 4 * tris_.size() + 64;
        for (std::size_t step = 0; step < cap; ++step) {
            const Tri& T = tris_[t];
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const int i = static_cast<int>((step + k) % 3);
                const Point2 a = pts_[T.v[(i + 1) % 3]], b = pts_[T.v[(i + 2) % 3]];
                if (orient2d_det(a, b, p) < 0.0 && T.nb[i] >= 0) {
                    t = T.nb[i];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        for (int u = 0; u < static_cast<int>(tris_.size()); ++u) {
            const Tri& T = tris_[u];
            if (orient2d_det(pts_[T.v[0]], pts_[T.v[1]], p) >= 0 &&
                orient2d_det(pts_[T.v[1]], pts_[T.v[2]], p) >= 0 &&
                orient2d_det(pts_[T.v[2]], pts_[T.v[0]], p) >= 0)
                return u;
        }
        throw PrecisionError("point location failed");
    }

    struct Edge {
        int a, b, out;
    };

    bool try_insert(int pi) {
        const Point2 p = pts_[pi];
        const int t0 = locate(p);
        ++epoch_;
        cavity_.clear();
        stack_.clear();
        boundary_.clear();
        stack_.push_back(t0);
        stamp_[t0] = epoch_;
        while (!stack_.empty()) {
            const int t = stack_.back();
            stack_.pop_back();
            cavity_.push_back(t);
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].nb[i];
                if (u >= 0 && stamp_[u] == epoch_) continue;
                bool inside = false;
                if (u >= 0) {
                    const Tri& U = tris_[u];
                    inside = incircle_unchecked(pts_[U.v[0]], pts_[U.v[1]], pts_[U.v[2]], p) > 0;
                }
                if (inside) {
                    stamp_[u] = epoch_;
                    stack_.push_back(u);
                }
            }
        }
        for (int t : cavity_) {
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].nb[i];
                if (u >= 0 && stamp_[u] == epoch_) continue;
                const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
                if (orient2d(pts_[a], pts_[b], p) <= 0) return false;
                boundary_.push_back({a, b, u});
            }
        }

        // Reuse the cavity slots, append the two extra triangles.
        const std::size_t k = boundary_.size();
        slots_.assign(cavity_.begin(), cavity_.end());
        while (slots_.size() < k) {
            slots_.push_back(static_cast<int>(tris_.size()));
            tris_.emplace_back();
            stamp_.push_back(0);
        }
        for (std::size_t e = 0; e < k; ++e) {
            const Edge& E = boundary_[e];
            const int idx = slots_[e];
            Tri& T = tris_[idx];
            T.v = {E.a, E.b, pi};
            T.nb = {-1, -1, E.out};
            if (E.out >= 0) {
                Tri& O = tris_[E.out];
                for (int j = 0; j < 3; ++j)
                    if (O.v[(j + 1) % 3] == E.b && O.v[(j + 2) % 3] == E.a) O.nb[j] = idx;
            }
        }
        for (std::size_t e = 0; e < k; ++e) {
            Tri& T = tris_[slots_[e]];
            for (std::size_t f = 0; f < k; ++f) {
                if (boundary_[f].a == T.v[1]) T.nb[0] = slots_[f];  // across (b, p)
                if (boundary_[f].b == T.v[0]) T.nb[1] = slots_[f];  // across (p, a)
            }
        }
        last_ = slots_[0];
        return true;
    }

    void insert(int pi) {
        const Point2 original = pts_[pi];
        std::uniform_real_distribution<double> jit(-1.0, 1.0);
        for (int attempt = 0; attempt < 32; ++attempt) {
            if (try_insert(pi)) {
                if (attempt > 0) ++jittered_;
                return;
            }
            const double s = 1e-9 * std::max(1.0, diam_) * (1 << std::min(attempt, 20));
            pts_[pi] = {original.x + s * jit(rng_), original.y + s * jit(rng_)};
        }
        throw PrecisionError("insertion failed after perturbation retries");
    }

    void flip(int t, int i) {
        const int u = tris_[t].nb[i];
        const int p = tris_[t].v[i], q = tris_[t].v[(i + 1) % 3], r = tris_[t].v[(i + 2) % 3];
        int j = 0;
        while (tris_[u].nb[j] != t) ++j;
        const int s = tris_[u].v[j];
        const int A = tris_[t].nb[(i + 2) % 3];
        const int B = tris_[t].nb[(i + 1) % 3];
        const int C = tris_[u].nb[(j + 2) % 3];
        const int D = tris_[u].nb[(j + 1) % 3];
        tris_[t].v = {p, q, s};
        tris_[t].nb = {D, u, A};
        tris_[u].v = {s, r, p};
        tris_[u].nb = {B, t, C};
        auto relink = [&](int x, int from, int to) {
            if (x < 0) return;
            for (int k = 0; k < 3; ++k)
                if (tris_[x].nb[k] == from) tris_[x].nb[k] = to;
        };
        relink(D, u, t);
        relink(B, t, u);
    }

    void legalize(std::vector<int> queue) {
        std::size_t guard = 0;
        while (!queue.empty()) {
            if (++guard > 100 * tris_.size() + 1000) throw PrecisionError("edge legalization did not converge");
            const int t = queue.back();
            queue.pop_back();
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].nb[i];
                if (u < 0) continue;
                int j = 0;
                while (tris_[u].nb[j] != t) ++j;
                const Tri& T = tris_[t];
                if (incircle_unchecked(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]], pts_[tris_[u].v[j]]) > 0) {
                    flip(t, i);
                    queue.push_back(t);
                    queue.push_back(u);
                    break;
                }
            }
        }
    }

    // Fills concave notches left along the hull after the super-triangle is removed.
    void repair_hull() {
        struct HullEdge {
            int t = -1, i = -1, count = 0;
        };
        for (int pass = 0; pass < 1000000; ++pass) {
            std::vector<HullEdge> out(n_), in(n_);
            for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
                for (int i = 0; i < 3; ++i)
                    if (tris_[t].nb[i] < 0) {
                        const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
                        out[a] = {t, i, out[a].count + 1};
                        in[b] = {t, i, in[b].count + 1};
                    }
            std::vector<char> used(n_, 0);
            std::vector<int> touched;
            for (std::size_t b = 0; b < n_; ++b) {
                if (out[b].count != 1 || in[b].count != 1 || used[b]) continue;
                const int t1 = in[b].t, i1 = in[b].i, t2 = out[b].t, i2 = out[b].i;
                const int a = tris_[t1].v[(i1 + 1) % 3];
                const int c = tris_[t2].v[(i2 + 2) % 3];
                if (a == c || used[a] || used[c]) continue;
                if (orient2d(pts_[a], pts_[b], pts_[c]) >= 0) continue;
                const int idx = static_cast<int>(tris_.size());
                Tri T;
                T.v = {a, c, static_cast<int>(b)};
                T.nb = {t2, t1, -1};  // opposite a: (c,b); opposite c: (b,a); opposite b: (a,c)
                tris_.push_back(T);
                tris_[t1].nb[i1] = idx;
                tris_[t2].nb[i2] = idx;
                used[a] = used[b] = used[c] = 1;
                ++hull_repairs_;
                touched.push_back(idx);
            }
            if (touched.empty()) return;
            legalize(touched);
        }
    }

    Triangulation finish() {
        const int N = static_cast<int>(n_);
        std::vector<int> remap(tris_.size(), -1);
        std::vector<Tri> kept;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            const Tri& T = tris_[t];
            if (T.v[0] >= N || T.v[1] >= N || T.v[2] >= N) continue;
            remap[t] = static_cast<int>(kept.size());
            kept.push_back(T);
        }
        if (kept.empty()) throw DegenerateInput("all sites are collinear");
        for (Tri& T : kept)
            for (int& u : T.nb) u = (u >= 0) ? remap[u] : -1;
        tris_ = std::move(kept);
        pts_.resize(n_);
        repair_hull();

        Triangulation out;
        out.sites = std::move(pts_);
        out.triangles = std::move(tris_);
        out.site_triangle.assign(n_, -1);
        for (int t = 0; t < static_cast<int>(out.triangles.size()); ++t)
            for (int v : out.triangles[t].v) out.site_triangle[v] = t;
        out.jittered = jittered_;
        out.hull_repairs = hull_repairs_;
        return out;
    }

    std::size_t n_;
    std::vector<Point2> pts_;
    std::vector<Tri> tris_;
    std::vector<unsigned> stamp_;
    std::mt19937_64 rng_;
    Point2 lo_, hi_;
    double diam_ = 1.0;
    int last_ = 0;
    unsigned epoch_ = 0;
    std::size_t jittered_ = 0;
    std::size_t hull_repairs_ = 0;
    std::vector<int> cavity_, stack_, slots_;
    std::vector<Edge> boundary_;
};

}  // namespace

Triangulation triangulate(std::span<const Point2> points, const TriangulateOptions& opt) {
    Builder b(std::vector<Point2>(points.begin(), points.end()), opt.order_seed, opt.super_scale);
    Triangulation t = b.run();
    t.seed = opt.order_seed;
    return t;
}

Triangulation triangulate(const PointSample& sample, const TriangulateOptions& opt) {
    if (sample.dim != 2) throw DomainError("triangulation is planar");
    TriangulateOptions o = opt;
    if (o.order_seed_from_sample) o.order_seed = splitmix64(sample.seed ^ 0x5851f42d4c957f2dULL);
    const auto pts = sample.points2();
    Triangulation t = triangulate(std::span<const Point2>(pts), o);
    t.region = sample.region;
    t.seed = sample.seed;
    return t;
}

std::vector<DelaunayCellRecord> delaunay_cells_in_window(const Triangulation& t, const Region& window) {
    std::vector<DelaunayCellRecord> out;
    for (int i = 0; i < static_cast<int>(t.triangles.size()); ++i) {
        const Point2 a = t.vertex(i, 0), b = t.vertex(i, 1), c = t.vertex(i, 2);
        const Point2 z = circumcenter(a, b, c);
        if (!window.in_core(z)) continue;
        out.push_back({t.triangles[i].v, z, dist(z, a), triangle_area(a, b, c)});
    }
    return out;
}

double cell_functional(const DelaunayCellRecord& c, CellFunctional f) {
    switch (f) {
        case CellFunctional::R: return c.circumradius;
        case CellFunctional::Area: return c.area;
        case CellFunctional::NegR: return -c.circumradius;
        case CellFunctional::NegArea: return -c.area;
    }
    return 0.0;
}

long long empirical_neighbor_pairs(const Triangulation& t, const Region& cube, double threshold,
                                   CellFunctional f) {
    long long m = 0;
    for (const auto& c : delaunay_cells_in_window(t, cube))
        if (cell_functional(c, f) > threshold) ++m;
    return m * (m - 1);
}

std::size_t audit_empty_circumdisk(const Triangulation& t) {
    std::size_t bad = 0;
    for (const Tri& T : t.triangles) {
        const Point2 a = t.sites[T.v[0]], b = t.sites[T.v[1]], c = t.sites[T.v[2]];
        for (int s = 0; s < static_cast<int>(t.sites.size()); ++s) {
            if (s == T.v[0] || s == T.v[1] || s == T.v[2]) continue;
            if (incircle_unchecked(a, b, c, t.sites[s]) > 0) ++bad;
        }
    }
    return bad;
}

std::size_t audit_adjacency(const Triangulation& t) {
    std::size_t bad = 0;
    for (int i = 0; i < static_cast<int>(t.triangles.size()); ++i) {
        const Tri& T = t.triangles[i];
        if (orient2d_det(t.sites[T.v[0]], t.sites[T.v[1]], t.sites[T.v[2]]) <= 0.0) ++bad;
        for (int k = 0; k < 3; ++k) {
            const int u = T.nb[k];
            if (u < 0) continue;
            const Tri& U = t.triangles[u];
            const int a = T.v[(k + 1) % 3], b = T.v[(k + 2) % 3];
            bool ok = false;
            for (int j = 0; j < 3; ++j)
                ok |= U.nb[j] == i && U.v[(j + 1) % 3] == b && U.v[(j + 2) % 3] == a;
            if (!ok) ++bad;
        }
    }
    return bad;
}

ConvexPolygon convex_hull(std::span<const Point2> points) {
    std::vector<Point2> p(points.begin(), points.end());
    std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return {p};
    std::vector<Point2> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && orient2d_det(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && orient2d_det(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return {h};
}

}  // namespace tess
