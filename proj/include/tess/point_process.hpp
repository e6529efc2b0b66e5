#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tess/geom.hpp"

namespace tess {

// Axis-aligned box in dimension 1..3. The core is the observation window; the
// simulation region is the core dilated by `padding`.
struct Region {
    int dim = 2;
    std::array<double, 3> lower{};
    std::array<double, 3> upper{};
    double padding = 0.0;

    static Region cube(int d, double side, double padding = 0.0);
    static Region rect(Point2 lo, Point2 hi, double padding = 0.0);

    void validate() const;
    double core_volume() const;
    double sim_volume() const;
    double sim_lower(int k) const { return lower[k] - padding; }
    double sim_upper(int k) const { return upper[k] + padding; }
    // Half-open membership [lower, upper).
    bool in_core(std::span<const double> x) const;
    bool in_core(Point2 p) const { return in_core(std::span<const double>{&p.x, 2}); }
    bool in_sim(std::span<const double> x) const;
};

struct GaussPoissonParams {
    double gamma_a = 1.0;
    double p0 = 0.0;
    double p1 = 1.0;
    double p2 = 0.0;

    void validate() const;
    double intensity() const { return (p1 + 2.0 * p2) * gamma_a; }
};

struct ProcessDescriptor {
    enum class Kind { Poisson, GaussPoisson };
    Kind kind = Kind::Poisson;
    double intensity = 1.0;
    GaussPoissonParams gp{};
};

struct PointSample {
    int dim = 2;
    std::vector<double> coords;  // row-major, dim per point
    Region region;
    ProcessDescriptor process;
    std::uint64_t seed = 0;

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    Point2 point2(std::size_t i) const { return {coords[2 * i], coords[2 * i + 1]}; }
    std::vector<Point2> points2() const;
};

inline constexpr double kDefaultPointCap = 1e8;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replicate_index);

// 53-bit uniform on [0, 1).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

PointSample sample_poisson(const Region& region, double intensity, std::uint64_t seed,
                           double cap = kDefaultPointCap);

PointSample sample_gauss_poisson(const Region& region, const GaussPoissonParams& params,
                                 std::uint64_t seed, double cap = kDefaultPointCap);

// Uniform grid over the simulation region for nearest-neighbour queries, d in 1..3.
class NeighborGrid {
public:
    NeighborGrid(const PointSample& sample, double cell_side);

    // Distance from point i to its nearest other point; +inf if alone.
    double nearest_distance(std::size_t i) const;
    double nearest_distance(std::span<const double> x, std::size_t exclude) const;

private:
    std::array<long, 3> cell_of(std::span<const double> x) const;
    long flat(const std::array<long, 3>& c) const;

    const PointSample* sample_;
    int dim_;
    double h_;
    std::array<double, 3> origin_{};
    std::array<long, 3> n_{1, 1, 1};
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> items_;
};

// Half the nearest-neighbour distance of site i.
double inradius(const PointSample& sample, std::size_t site);

}  // namespace tess
