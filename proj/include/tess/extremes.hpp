#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tess/laws.hpp"

namespace tess {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

// N_rho sub-cubes tiling [0, L]^d, L = rho^(1/d). The count used in the
// formulas is the nominal N_rho; the tiling uses k = floor(N_rho^(1/d)) per axis.
struct SubcubeGrid {
    int d = 2;
    double side = 0.0;     // window side L
    long long n_rho = 0;   // nominal sub-cube count
    int per_axis = 1;
    double cell = 0.0;     // tiling cube side L / per_axis
    double dependency_range = 4.0;

    static SubcubeGrid make(int d, double rho, double effective_rho, double dependency_range = 4.0);
    std::size_t count() const;
    std::size_t index(std::span<const double> x) const;
    // Side of the dependency cube (2R+1) L N_rho^(-1/d).
    double patch_side() const;
};

// floor(effective_rho / (2 log rho)); effective_rho = rho except for Gauss-Poisson.
long long n_rho(double effective_rho, double rho);
double default_dependency_range(int d);

struct TailCell {
    std::array<double, 3> nucleus{};
    double value = 0.0;  // oriented score
};

// Summary of one replication in oriented form: larger is more extreme.
struct ReplicationResult {
    std::uint64_t seed = 0;
    Orientation orientation = Orientation::Max;
    int d = 2;
    double rho = 0.0;
    double window_side = 0.0;
    std::size_t cell_count = 0;
    std::size_t excluded = 0;            // cells dropped as unbounded-equivalent
    bool complete = true;                // false if only the extreme tail was simulated
    std::vector<double> order_stats;     // M^(1) >= M^(2) >= ...
    std::vector<double> subcube_max;     // -inf when empty
    std::size_t nonempty_subcubes = 0;
    std::vector<TailCell> tail;          // most extreme cells, descending
    double tail_floor = kNegInf;         // counts are exact for oriented thresholds >= this

    double oriented(double score) const { return orientation == Orientation::Max ? score : -score; }
    double raw(double value) const { return orientation == Orientation::Max ? value : -value; }
};

struct ScoredCells {
    std::vector<std::array<double, 3>> nuclei;
    std::vector<double> scores;  // raw functional values
    std::size_t excluded = 0;
};

ReplicationResult summarize_replication(const ScoredCells& cells, const SubcubeGrid& grid, Orientation o,
                                        double rho, std::uint64_t seed, std::size_t order_max,
                                        std::size_t tail_keep);

struct ExceedanceCounts {
    std::size_t u = 0;
    std::size_t u_prime = 0;
};

// v is a raw threshold; exceedance means score > v (maxima) or score < v (minima).
ExceedanceCounts exceedance_counts(const ReplicationResult& rep, double v);

struct PhiPoint {
    std::array<double, 3> position{};  // in W = [0,1]^d
    double t = 0.0;                    // normalized score
};

std::vector<PhiPoint> exceedance_point_process(const ReplicationResult& rep, const ThresholdFamily& family,
                                               double t_floor);

// B x (s, t]: spatial box in W times a normalized-score interval.
struct PhiBox {
    std::array<double, 3> lower{};
    std::array<double, 3> upper{1.0, 1.0, 1.0};
    double s = 0.0;
    double t = kPosInf;
};

struct BoxDiagnostics {
    double expected = 0.0;   // nu(box)
    double mean = 0.0;
    double variance = 0.0;
    double se = 0.0;
    double dispersion = 0.0;
};

struct PpDiagnostics {
    std::vector<BoxDiagnostics> boxes;
    std::vector<std::vector<double>> correlation;
};

PpDiagnostics poisson_pp_diagnostics(std::span<const std::vector<PhiPoint>> lists, std::span<const PhiBox> boxes,
                                     const ThresholdFamily& family);

double poisson_cdf(std::size_t r_minus_one, double tau);

struct GapResult {
    double gap = 0.0;
    double p_hat = 0.0;
    double target = 0.0;
    double se = 0.0;
    double tau = 0.0;
};

// |P(M^(r) <= v_rho(t)) - exp(-tau) sum_{k<r} tau^k/k!|, with exceedance in the family's direction.
GapResult chen_stein_gap(std::span<const ReplicationResult> results, const ThresholdFamily& family, int r,
                         double t);

struct ExtremalIndex {
    double theta = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double se = 0.0;
    double p_hat = 0.0;
    double tau = 0.0;
    double threshold = 0.0;
    double theta_blocks = 0.0;  // sum U' / sum U
};

ExtremalIndex estimate_extremal_index(std::span<const ReplicationResult> results, const ThresholdFamily& family,
                                      double tau, double z = 1.96);
// Same estimator on bare exceedance indicators P(no exceedance) (used for synthetic controls).
ExtremalIndex extremal_index_from_probability(std::size_t n, std::size_t none, double tau, double z = 1.96);

struct G2Estimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
    std::size_t pairs = 0;
};

// Translation-averaged G2 over full-window replications: every ordered pair of
// exceedances is weighted by the covariogram ratio of the dependency cube to the window.
G2Estimate g2_from_window(std::span<const ReplicationResult> results, const SubcubeGrid& grid, double v);

// Sup |F_n - F|; F is evaluated on both sides of every sample so step targets are handled.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

enum class Trend { Decreasing, Increasing, Flat, NonVanishing, Irregular };
std::string_view trend_name(Trend t);
// Verdict on a sequence indexed by increasing rho. For a quantity expected to
// vanish (G2), flat or growing sequences are reported as non-vanishing.
Trend trend_verdict(std::span<const double> rhos, std::span<const double> values, bool should_vanish = false);

}  // namespace tess
