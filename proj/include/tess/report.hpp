#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tess/experiment.hpp"
#include "tess/extremes.hpp"

namespace tess {

struct GapRow {
    int r = 1;
    double t = 0.0;
    GapResult gap;
};

struct Summary {
    Experiment experiment{};
    int d = 2;
    double rho = 0.0;
    std::size_t replications = 0;
    std::uint64_t master_seed = 0;
    double mean_cells = 0.0;
    std::optional<double> ks;
    // KS range when the family constant moves by +-2 standard errors.
    std::optional<double> ks_low, ks_high;
    std::vector<GapRow> gaps;
    std::optional<ExtremalIndex> theta;
    std::optional<G2Estimate> g2;
    double mean_u = 0.0;        // at v_rho(tau)
    double mean_u_prime = 0.0;
};

// Normalized extremes t = a^-1 (M - b) (or the non-affine inverse); +-inf when
// a replication has no retained cell.
std::vector<double> normalized_extremes(std::span<const ReplicationResult> results, const ThresholdFamily& f);

Summary summarize(const ExperimentConfig& cfg, Experiment e, double rho, std::span<const ReplicationResult> results,
                  const McConstants& k);

struct CheckOutcome {
    bool ok = true;
    std::vector<std::string> violations;
};

// Acceptance tolerances per experiment (KS bound or extremal-index band).
CheckOutcome check_summary(const Summary& s);

}  // namespace tess
