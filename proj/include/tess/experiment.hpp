#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tess/extremes.hpp"
#include "tess/laws.hpp"
#include "tess/point_process.hpp"

namespace tess {

// How cells are produced for min-circumradius runs: full triangulation, or a
// local search that only finds triangles below a circumradius cap.
enum class Method { Full, Local };

struct ExperimentConfig {
    Experiment experiment = Experiment::DelaunayMinCircumradius;
    std::vector<Experiment> companions;  // extra experiments sharing each tessellation
    int d = 2;
    std::vector<double> rhos{1e4};
    std::size_t replications = 100;
    std::uint64_t master_seed = 1;
    std::optional<double> intensity;
    std::optional<GaussPoissonParams> gp;
    std::vector<double> t_grid;
    double tau = 1.0;
    int order_max = 3;
    std::size_t flower_samples = 0;  // 0: exact disk union
    std::size_t alpha4_samples = 2'000'000;
    std::size_t alpha5_cells = 1'000'000;
    std::optional<double> margin;
    Method method = Method::Full;
    double local_tau_max = 8.0;
    std::size_t tail_keep = 256;
    std::optional<double> dependency_range;
    std::size_t g2_patches = 2000;
    std::string output_dir = ".";
    unsigned threads = 0;  // 0: hardware concurrency

    // Throws ConfigError.
    void validate() const;
};

// Monte Carlo constants shared by the farthest-neighbour and flower families.
struct McConstants {
    std::optional<McValue> alpha4;
    std::optional<McValue> alpha5;
};

struct NeighborPmf {
    std::map<int, double> pmf;
    std::map<int, std::size_t> counts;
    std::size_t cells = 0;
};

// Empirical pmf of the neighbour count of bounded Voronoi cells (d = 2, intensity 1).
NeighborPmf estimate_neighbor_pmf(std::size_t min_cells, std::uint64_t seed, unsigned threads = 0);
McValue estimate_alpha5(std::size_t min_cells, std::uint64_t seed, unsigned threads = 0);

// Fills the constants the experiment needs, computing whatever is missing.
void ensure_constants(const ExperimentConfig& cfg, McConstants& k);

ThresholdFamily family_for(const ExperimentConfig& cfg, Experiment e, double rho, const McConstants& k);

// Intensity of the simulated process and the default padding.
double process_intensity(const ExperimentConfig& cfg, Experiment e);
double default_margin(int d, double rho);
SubcubeGrid grid_for(const ExperimentConfig& cfg, Experiment e, double rho);

// Seed stream of one rho within a multi-rho run.
std::uint64_t master_for_rho(std::uint64_t master, double rho);

// Cells of a sample whose nucleus lies in the core of `window`, scored for `e`.
ScoredCells score_cells(const ExperimentConfig& cfg, Experiment e, const PointSample& sample);

// Triangles with circumradius below r_max and circumcenter in the core of the
// sample's region; score R^2.
ScoredCells local_small_circumradius(const PointSample& sample, double r_max);

using ResultSet = std::map<Experiment, std::vector<ReplicationResult>>;

// All experiments in {cfg.experiment} + cfg.companions at one rho, sharing each
// replication's sample. Deterministic given the master seed.
ResultSet run_group(const ExperimentConfig& cfg, double rho, const McConstants& k,
                    const std::function<void(std::size_t)>& progress = {});
std::vector<ReplicationResult> run_experiment(const ExperimentConfig& cfg, const McConstants& k = {});

// Patch estimator: N_rho times the mean number of ordered exceedance pairs with
// both nuclei in a dependency cube, simulated with padding.
G2Estimate estimate_g2(const ExperimentConfig& cfg, Experiment e, double rho, double v, std::size_t patches,
                       std::uint64_t seed);

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace tess
