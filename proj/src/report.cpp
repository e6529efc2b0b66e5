#include "tess/report.hpp"

#include <cmath>
#include <sstream>

#include "tess/errors.hpp"

namespace tess {

std::vector<double> normalized_extremes(std::span<const ReplicationResult> results, const ThresholdFamily& f) {
    std::vector<double> out;
    out.reserve(results.size());
    for (const auto& r : results) {
        const double m = r.order_stats.empty() ? kNegInf : r.order_stats.front();
        if (m == kNegInf) {
            // Nothing retained: the extreme lies beyond the search cap.
            out.push_back(f.orientation == Orientation::Max ? kNegInf : kPosInf);
            continue;
        }
        out.push_back(f.normalize(r.raw(m)));
    }
    return out;
}

namespace {

bool ks_applies(Experiment e) {
    return e != Experiment::VoronoiMinInradius && e != Experiment::DelaunayMaxCircumradius;
}

double ks_with(std::span<const ReplicationResult> results, const ThresholdFamily& f) {
    const auto t = normalized_extremes(results, f);
    return ks_distance(t, [&](double x) { return f.limit_cdf(x); });
}

}  // namespace

Summary summarize(const ExperimentConfig& cfg, Experiment e, double rho, std::span<const ReplicationResult> results,
                  const McConstants& k) {
    Summary s;
    s.experiment = e;
    s.d = cfg.d;
    s.rho = rho;
    s.replications = results.size();
    s.master_seed = cfg.master_seed;
    if (results.empty()) return s;
    const ThresholdFamily f = family_for(cfg, e, rho, k);

    double cells = 0.0;
    for (const auto& r : results) cells += static_cast<double>(r.cell_count);
    s.mean_cells = cells / static_cast<double>(results.size());

    if (results.size() >= 2) {
        s.ks = ks_with(results, f);
        const std::optional<McValue>& alpha =
            e == Experiment::VoronoiMinFarthest ? k.alpha4 : e == Experiment::VoronoiMinFlower ? k.alpha5 : std::nullopt;
        if (alpha) {
            double lo = *s.ks, hi = *s.ks;
            for (double z : {-2.0, 2.0}) {
                McConstants shifted = k;
                McValue a = *alpha;
                a.value += z * a.se;
                (e == Experiment::VoronoiMinFarthest ? shifted.alpha4 : shifted.alpha5) = a;
                const double ks = ks_with(results, family_for(cfg, e, rho, shifted));
                lo = std::min(lo, ks);
                hi = std::max(hi, ks);
            }
            s.ks_low = lo;
            s.ks_high = hi;
        }
    }

    const double v = f.v_of_tau(cfg.tau);
    double su = 0.0, sup = 0.0;
    for (const auto& r : results) {
        const auto c = exceedance_counts(r, v);
        su += static_cast<double>(c.u);
        sup += static_cast<double>(c.u_prime);
    }
    s.mean_u = su / static_cast<double>(results.size());
    s.mean_u_prime = sup / static_cast<double>(results.size());

    if (results.size() >= 200) {
        std::vector<double> ts = cfg.t_grid;
        if (ts.empty())
            for (double tau : {0.5, 1.0, 2.0}) ts.push_back(f.tau_inverse(tau));
        for (int r = 1; r <= cfg.order_max; ++r)
            for (double t : ts) s.gaps.push_back({r, t, chen_stein_gap(results, f, r, t)});
    }
    if (results.size() >= 500) {
        try {
            s.theta = estimate_extremal_index(results, f, cfg.tau);
        } catch (const DivergenceError&) {
        }
    }
    s.g2 = g2_from_window(results, grid_for(cfg, e, rho), v);
    return s;
}

CheckOutcome check_summary(const Summary& s) {
    CheckOutcome out;
    auto fail = [&](const std::string& m) {
        out.ok = false;
        out.violations.push_back(m);
    };
    if (ks_applies(s.experiment)) {
        double bound = 0.08;
        switch (s.experiment) {
            case Experiment::DelaunayMaxArea:
            case Experiment::GpMaxInradius: bound = 0.12; break;
            case Experiment::VoronoiMinFarthest:
            case Experiment::VoronoiMinFlower: bound = 0.10; break;
            default: break;
        }
        if (!s.ks) {
            fail("KS distance unavailable");
        } else if (*s.ks > bound) {
            std::ostringstream m;
            m << "KS " << *s.ks << " exceeds " << bound;
            fail(m.str());
        }
    }
    if (s.experiment == Experiment::DelaunayMinCircumradius)
        for (const auto& g : s.gaps)
            if (g.r >= 2 && g.gap.gap > 0.08) {
                std::ostringstream m;
                m << "order-" << g.r << " gap " << g.gap.gap << " at t=" << g.t << " exceeds 0.08";
                fail(m.str());
            }
    auto band = [&](double lo, double hi) {
        if (!s.theta) {
            fail("extremal index unavailable");
        } else if (s.theta->theta < lo || s.theta->theta > hi) {
            std::ostringstream m;
            m << "theta " << s.theta->theta << " outside [" << lo << ", " << hi << "]";
            fail(m.str());
        }
    };
    if (s.experiment == Experiment::VoronoiMinInradius) band(0.40, 0.60);
    if (s.experiment == Experiment::DelaunayMaxCircumradius) band(0.35, 0.65);
    return out;
}

}  // namespace tess
