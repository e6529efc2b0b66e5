#include "tess/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tess/errors.hpp"

namespace tess {

Region Region::cube(int d, double side, double padding) {
    Region r;
    r.dim = d;
    for (int k = 0; k < d; ++k) r.upper[k] = side;
    r.padding = padding;
    r.validate();
    return r;
}

Region Region::rect(Point2 lo, Point2 hi, double padding) {
    Region r;
    r.dim = 2;
    r.lower = {lo.x, lo.y, 0.0};
    r.upper = {hi.x, hi.y, 0.0};
    r.padding = padding;
    r.validate();
    return r;
}

void Region::validate() const {
    if (dim < 1 || dim > 3) throw DomainError("region dimension must be 1, 2 or 3");
    if (!(padding >= 0.0)) throw DomainError("padding must be nonnegative");
    for (int k = 0; k < dim; ++k)
        if (!(upper[k] > lower[k])) throw DomainError("region upper corner must exceed lower corner");
}

double Region::core_volume() const {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= upper[k] - lower[k];
    return v;
}

double Region::sim_volume() const {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= upper[k] - lower[k] + 2.0 * padding;
    return v;
}

bool Region::in_core(std::span<const double> x) const {
    for (int k = 0; k < dim; ++k)
        if (x[k] < lower[k] || x[k] >= upper[k]) return false;
    return true;
}

bool Region::in_sim(std::span<const double> x) const {
    for (int k = 0; k < dim; ++k)
        if (x[k] < sim_lower(k) || x[k] > sim_upper(k)) return false;
    return true;
}

void GaussPoissonParams::validate() const {
    if (!(gamma_a > 0.0)) throw DomainError("gamma_a must be positive");
    if (p0 < 0.0 || p1 < 0.0 || p2 < 0.0) throw DomainError("cluster probabilities must be nonnegative");
    if (std::abs(p0 + p1 + p2 - 1.0) > 1e-12) throw DomainError("cluster probabilities must sum to 1");
    if (p0 == 1.0) throw DomainError("p0 must differ from 1");
}

std::vector<Point2> PointSample::points2() const {
    std::vector<Point2> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = point2(i);
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replicate_index) {
    // Both maps are bijections of the free argument, so streams never collide
    // across replicates of one master seed or across master seeds at one index.
    return splitmix64(splitmix64(master_seed) + 0xd1b54a32d192ed03ULL * (replicate_index + 1));
}

namespace {

long long draw_count(std::mt19937_64& rng, double mean, double cap) {
    if (mean > cap) throw ResourceLimit("expected point count exceeds the configured cap");
    if (mean <= 0.0) return 0;
    std::poisson_distribution<long long> pd(mean);
    return pd(rng);
}

}  // namespace

PointSample sample_poisson(const Region& region, double intensity, std::uint64_t seed, double cap) {
    region.validate();
    if (!(intensity > 0.0)) throw DomainError("intensity must be positive");
    PointSample s;
    s.dim = region.dim;
    s.region = region;
    s.process = {ProcessDescriptor::Kind::Poisson, intensity, {}};
    s.seed = seed;

    std::mt19937_64 rng(seed);
    const long long n = draw_count(rng, intensity * region.sim_volume(), cap);
    s.coords.resize(static_cast<std::size_t>(n) * region.dim);
    std::array<double, 3> lo{}, ext{};
    for (int k = 0; k < region.dim; ++k) {
        lo[k] = region.sim_lower(k);
        ext[k] = region.sim_upper(k) - lo[k];
    }
    for (std::size_t i = 0; i < s.coords.size(); i += region.dim)
        for (int k = 0; k < region.dim; ++k) s.coords[i + k] = lo[k] + ext[k] * uniform01(rng);
    return s;
}

PointSample sample_gauss_poisson(const Region& region, const GaussPoissonParams& params,
                                 std::uint64_t seed, double cap) {
    region.validate();
    params.validate();
    if (region.dim != 2) throw DomainError("Gauss-Poisson sampler is planar");
    if (params.p0 == 0.0 && params.p2 == 0.0) {
        // Single-point clusters: exactly the Poisson sampler's stream.
        PointSample s = sample_poisson(region, params.gamma_a, seed, cap);
        s.process = {ProcessDescriptor::Kind::GaussPoisson, params.intensity(), params};
        return s;
    }
    PointSample s;
    s.dim = 2;
    s.region = region;
    s.process = {ProcessDescriptor::Kind::GaussPoisson, params.intensity(), params};
    s.seed = seed;

    std::mt19937_64 rng(seed);
    const double x0 = region.sim_lower(0) - 0.5, x1 = region.sim_upper(0) + 0.5;
    const double y0 = region.sim_lower(1) - 0.5, y1 = region.sim_upper(1) + 0.5;
    const double parent_area = (x1 - x0) * (y1 - y0);
    const long long n = draw_count(rng, params.gamma_a * parent_area, cap);
    s.coords.reserve(static_cast<std::size_t>(2.0 * params.intensity() * region.sim_volume() + 16));

    auto keep = [&](double x, double y) {
        const double p[2] = {x, y};
        if (region.in_sim(p)) {
            s.coords.push_back(x);
            s.coords.push_back(y);
        }
    };
    for (long long i = 0; i < n; ++i) {
        const double px = x0 + (x1 - x0) * uniform01(rng);
        const double py = y0 + (y1 - y0) * uniform01(rng);
        const double u = uniform01(rng);
        if (u < params.p0) continue;
        if (u < params.p0 + params.p1) {
            keep(px, py);
            continue;
        }
        const double phi = 2.0 * std::numbers::pi * uniform01(rng);
        const double hx = 0.5 * std::cos(phi), hy = 0.5 * std::sin(phi);
        keep(px + hx, py + hy);
        keep(px - hx, py - hy);
    }
    return s;
}

NeighborGrid::NeighborGrid(const PointSample& sample, double cell_side)
    : sample_(&sample), dim_(sample.dim), h_(cell_side) {
    if (!(h_ > 0.0)) throw DomainError("grid cell side must be positive");
    long total = 1;
    for (int k = 0; k < dim_; ++k) {
        origin_[k] = sample.region.sim_lower(k);
        const double ext = sample.region.sim_upper(k) - origin_[k];
        n_[k] = std::max(1L, static_cast<long>(std::ceil(ext / h_)));
        total *= n_[k];
    }
    if (total > 400'000'000L) throw ResourceLimit("neighbour grid too fine");
    const std::size_t m = sample.size();
    start_.assign(static_cast<std::size_t>(total) + 1, 0);
    std::vector<std::uint32_t> cell(m);
    for (std::size_t i = 0; i < m; ++i) {
        cell[i] = static_cast<std::uint32_t>(flat(cell_of(sample.point(i))));
        ++start_[cell[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    items_.resize(m);
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < m; ++i) items_[fill[cell[i]]++] = static_cast<std::uint32_t>(i);
}

std::array<long, 3> NeighborGrid::cell_of(std::span<const double> x) const {
    std::array<long, 3> c{0, 0, 0};
    for (int k = 0; k < dim_; ++k)
        c[k] = std::clamp(static_cast<long>(std::floor((x[k] - origin_[k]) / h_)), 0L, n_[k] - 1);
    return c;
}

long NeighborGrid::flat(const std::array<long, 3>& c) const {
    return (c[2] * n_[1] + c[1]) * n_[0] + c[0];
}

double NeighborGrid::nearest_distance(std::size_t i) const {
    return nearest_distance(sample_->point(i), i);
}

double NeighborGrid::nearest_distance(std::span<const double> x, std::size_t exclude) const {
    const auto c = cell_of(x);
    double best2 = std::numeric_limits<double>::infinity();
    const long kmax = std::max({n_[0], n_[1], n_[2]});
    for (long ring = 0; ring <= kmax; ++ring) {
        std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int k = 0; k < dim_; ++k) {
            lo[k] = c[k] - ring;
            hi[k] = c[k] + ring;
        }
        for (long z = lo[2]; z <= hi[2]; ++z) {
            if (z < 0 || z >= n_[2]) continue;
            for (long y = lo[1]; y <= hi[1]; ++y) {
                if (y < 0 || y >= n_[1]) continue;
                for (long xx = lo[0]; xx <= hi[0]; ++xx) {
                    if (xx < 0 || xx >= n_[0]) continue;
                    const long cheb = std::max({std::abs(xx - c[0]), std::abs(y - c[1]), std::abs(z - c[2])});
                    if (cheb != ring) continue;
                    const long f = (z * n_[1] + y) * n_[0] + xx;
                    for (std::uint32_t s = start_[f]; s < start_[f + 1]; ++s) {
                        const std::uint32_t j = items_[s];
                        if (j == exclude) continue;
                        const auto q = sample_->point(j);
                        double d2 = 0.0;
                        for (int k = 0; k < dim_; ++k) d2 += (q[k] - x[k]) * (q[k] - x[k]);
                        best2 = std::min(best2, d2);
                    }
                }
            }
        }
        const double reach = static_cast<double>(ring) * h_;
        if (best2 <= reach * reach) break;
    }
    return std::sqrt(best2);
}

double inradius(const PointSample& sample, std::size_t site) {
    const auto x = sample.point(site);
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sample.size(); ++j) {
        if (j == site) continue;
        const auto q = sample.point(j);
        double d2 = 0.0;
        for (int k = 0; k < sample.dim; ++k) d2 += (q[k] - x[k]) * (q[k] - x[k]);
        best2 = std::min(best2, d2);
    }
    return 0.5 * std::sqrt(best2);
}

}  // namespace tess
