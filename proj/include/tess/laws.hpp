#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>

#include "tess/point_process.hpp"

namespace tess {

struct McValue {
    double value = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

struct LawSet {
    int d = 2;
    double kappa = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double delta_prime = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;  // planar only
    double alpha3 = 0.0;  // planar only
    double alpha6 = 0.0;
    std::optional<McValue> alpha4;
    std::optional<McValue> alpha5;
};

double unit_ball_volume(int d);
LawSet constants(int d);

double delaunay_circumradius_cdf(double v, int d);

// Survival of the typical planar Delaunay area, by direct quadrature.
double delaunay_area_survival_2d(double v);
// Table-backed versions of the same law, for bulk evaluation.
double delaunay_area_survival_2d_fast(double v);
double delaunay_area_cdf_2d_fast(double v);

double voronoi_inradius_survival(double v, int d);

// Mixture of Gamma(k, 1) CDFs weighted by pmf; `truncation` receives the unsupplied mass.
double flower_cdf(double v, const std::map<int, double>& pmf, double* truncation = nullptr);

// Monte Carlo constant for the smallest farthest-neighbour distance (d = 2).
McValue alpha_d4_estimate(int d, std::size_t mc_samples, std::uint64_t seed);
McValue alpha_d5_from_pmf(int d, double p_d_plus_1, double se, std::size_t cells, std::uint64_t seed);

double extremal_index_delaunay_max_R(int d);

// Area of the intersection of two disks of radius 2v whose centers are one unit apart.
double gp_lens_area(double v);
// Palm probability that the typical point has no other point within 2v.
double gp_palm_isolated(double v, const GaussPoissonParams& p);
// Leading part of -log of the isolation probability for 2v >= 1.
double gp_exponent(double v, const GaussPoissonParams& p);
// Root of gp_exponent(v) = level.
double gp_threshold(double level, const GaussPoissonParams& p);

enum class Experiment {
    DelaunayMinCircumradius,
    DelaunayMaxArea,
    DelaunayMinArea,
    VoronoiMinFarthest,
    VoronoiMinFlower,
    VoronoiMinInradius,
    DelaunayMaxCircumradius,
    GpMaxInradius,
};

std::string_view experiment_name(Experiment e);
// Throws ConfigError for an unknown name.
Experiment parse_experiment(std::string_view name);

enum class Orientation { Max, Min };

struct FamilyParams {
    int d = 2;
    double rho = 1e4;
    GaussPoissonParams gp{};
    std::optional<double> alpha4;
    std::optional<double> alpha5;
};

// Threshold family on the experiment's score: R^d, area, D^d, flower volume,
// r^d or r (Gauss-Poisson). Minima exceed downwards.
struct ThresholdFamily {
    Experiment experiment{};
    int d = 2;
    double rho = 0.0;
    Orientation orientation = Orientation::Max;
    bool affine = true;
    double a = 1.0;
    double b = 0.0;
    double theta = 1.0;
    int score_power = 1;  // score = functional^score_power

    std::function<double(double)> tau_fn;       // tau(t)
    std::function<double(double)> tau_inverse;  // t(tau)
    std::function<double(double)> v_fn;         // non-affine families only
    std::function<double(double)> t_fn;         // inverse of v_fn
    std::function<double(double)> typical_exceed;  // P(score of typical cell exceeds v), if known

    double v(double t) const { return affine ? a * t + b : v_fn(t); }
    double normalize(double score) const { return affine ? (score - b) / a : t_fn(score); }
    double tau(double t) const { return tau_fn(t); }
    double limit_prob(double t) const { return std::exp(-theta * tau(t)); }
    double limit_cdf(double t) const;
    double oriented(double score) const { return orientation == Orientation::Max ? score : -score; }
    bool exceeds(double score, double v) const {
        return orientation == Orientation::Max ? score > v : score < v;
    }
    // Threshold with rho * P(exceedance) = tau; exact when the typical law is known.
    double v_of_tau(double tau) const;
};

ThresholdFamily threshold_family(Experiment e, const FamilyParams& p);

}  // namespace tess
