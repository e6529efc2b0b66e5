#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tess/errors.hpp"
#include "tess/experiment.hpp"
#include "tess/extremes.hpp"

using namespace tess;

namespace {

ExperimentConfig small_config(Experiment e, double rho, std::size_t reps, std::uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    cfg.rhos = {rho};
    cfg.replications = reps;
    cfg.master_seed = seed;
    cfg.threads = 1;
    return cfg;
}

// Synthetic replication with cells scored i.i.d. uniform over a window of side L.
ScoredCells synthetic_cells(std::size_t n, double L, std::mt19937_64& rng) {
    ScoredCells c;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        c.nuclei.push_back({L * u(rng), L * u(rng), 0.0});
        c.scores.push_back(u(rng));
    }
    return c;
}

}  // namespace

TEST_CASE("sub-cube grid") {
    const SubcubeGrid g = SubcubeGrid::make(2, 1e4, 1e4);
    CHECK(g.n_rho == static_cast<long long>(std::floor(1e4 / (2 * std::log(1e4)))));
    CHECK(g.per_axis == static_cast<int>(std::floor(std::sqrt(static_cast<double>(g.n_rho)))));
    CHECK(g.cell * g.per_axis == rel(100.0));
    const double corner[2] = {99.999, 0.0};
    CHECK(g.index(corner) == static_cast<std::size_t>(g.per_axis - 1));
    CHECK(default_dependency_range(2) == 4.0);
    CHECK(g.patch_side() == rel(9.0 * 100.0 / std::sqrt(static_cast<double>(g.n_rho))));
    const SubcubeGrid gp = SubcubeGrid::make(2, 1e5, 1e5 * (2.0 / 3.0));
    CHECK(gp.n_rho == static_cast<long long>(std::floor(1e5 * 2.0 / 3.0 / (2 * std::log(1e5)))));
}

TEST_CASE("replication summaries and exceedance counts") {
    std::mt19937_64 rng(3);
    const SubcubeGrid g = SubcubeGrid::make(2, 1e4, 1e4);
    for (int rep = 0; rep < 100; ++rep) {
        const ScoredCells cells = synthetic_cells(2000, 100.0, rng);
        const Orientation o = rep % 2 ? Orientation::Max : Orientation::Min;
        const ReplicationResult r = summarize_replication(cells, g, o, 1e4, rep, 3, rep % 3 == 0 ? 5000 : 64);
        CHECK(r.order_stats[0] >= r.order_stats[1]);
        CHECK(r.order_stats[1] >= r.order_stats[2]);
        CHECK(r.order_stats[0] == *std::max_element(r.subcube_max.begin(), r.subcube_max.end()));
        CHECK(r.raw(r.oriented(0.3)) == 0.3);

        // Independent recount at thresholds inside the retained tail.
        for (double q : {0.5, 0.98, 0.995, 0.9999}) {
            const double v = o == Orientation::Max ? q : 1.0 - q;
            if (r.oriented(v) < r.tail_floor) continue;
            std::size_t u = 0;
            std::vector<char> hit(g.count(), 0);
            for (std::size_t i = 0; i < cells.scores.size(); ++i) {
                const bool ex = o == Orientation::Max ? cells.scores[i] > v : cells.scores[i] < v;
                if (!ex) continue;
                ++u;
                hit[g.index(cells.nuclei[i])] = 1;
            }
            const std::size_t up = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
            const ExceedanceCounts c = exceedance_counts(r, v);
            CHECK(c.u == u);
            CHECK(c.u_prime == up);
            CHECK(c.u_prime <= c.u);
        }
        const double none = o == Orientation::Max ? kPosInf : kNegInf;
        CHECK(exceedance_counts(r, none).u == 0);
        CHECK(exceedance_counts(r, none).u_prime == 0);
        if (r.tail_floor == kNegInf) {
            const ExceedanceCounts all = exceedance_counts(r, -none);
            CHECK(all.u == 2000);
            CHECK(all.u_prime == r.nonempty_subcubes);
        } else {
            CHECK(exceedance_counts(r, -none).u == 2000);
            CHECK_THROWS_AS(exceedance_counts(r, o == Orientation::Max ? 0.2 : 0.8), PrecisionError);
        }
    }
}

TEST_CASE("minima round trip through the oriented form") {
    const ExperimentConfig cfg = small_config(Experiment::DelaunayMinArea, 2000, 3);
    const auto reps = run_experiment(cfg);
    REQUIRE(reps.size() == 3);
    const ThresholdFamily f = family_for(cfg, Experiment::DelaunayMinArea, 2000, {});
    for (const auto& r : reps) {
        CHECK(r.orientation == Orientation::Min);
        const double smallest = r.raw(r.order_stats[0]);
        CHECK(smallest > 0.0);
        // The first order statistic is the smallest raw area.
        for (const auto& c : r.tail) CHECK(r.raw(c.value) >= smallest);
        CHECK(exceedance_counts(r, smallest).u == 0);
        CHECK(exceedance_counts(r, std::nextafter(smallest, 1.0)).u >= 1);
        CHECK(f.normalize(smallest) > 0.0);
    }
}

TEST_CASE("exceedance point process") {
    const ExperimentConfig cfg = small_config(Experiment::DelaunayMaxArea, 2000, 4);
    const auto reps = run_experiment(cfg);
    const ThresholdFamily f = family_for(cfg, Experiment::DelaunayMaxArea, 2000, {});
    for (const auto& r : reps) {
        const auto phi = exceedance_point_process(r, f, -1.0);
        for (const auto& p : phi) {
            CHECK(p.position[0] >= 0.0);
            CHECK(p.position[0] <= 1.0);
            CHECK(p.position[1] >= 0.0);
            CHECK(p.position[1] <= 1.0);
        }
        for (double t : {-1.0, 0.0, 1.0, 3.0}) {
            const auto n = std::count_if(phi.begin(), phi.end(), [&](const PhiPoint& p) { return p.t > t; });
            CHECK(static_cast<std::size_t>(n) == exceedance_counts(r, f.v(t)).u);
        }
        CHECK(exceedance_point_process(r, f, 1e6).empty());
    }
    FamilyParams fp;
    fp.rho = 1e4;
    fp.gp = {2.0 / 3.0, 0.0, 0.5, 0.5};
    CHECK_THROWS_AS(exceedance_point_process(reps[0], threshold_family(Experiment::GpMaxInradius, fp), 0.0),
                    UnsupportedFamily);
}

TEST_CASE("point-process diagnostics on synthetic Poisson exceedances") {
    // Phi: Poisson(tau) points uniform in W with t drawn so that tau(t) = e^-t.
    FamilyParams fp;
    fp.rho = 1e4;
    const ThresholdFamily f = threshold_family(Experiment::DelaunayMaxArea, fp);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t0 = -1.0;
    std::poisson_distribution<int> count(std::exp(-t0));
    std::vector<std::vector<PhiPoint>> lists(500);
    for (auto& l : lists) {
        const int m = count(rng);
        for (int k = 0; k < m; ++k) l.push_back({{u(rng), u(rng), 0.0}, t0 - std::log(u(rng))});
    }
    const PhiBox boxes[] = {{{0, 0, 0}, {0.5, 0.5, 1}, -1.0, kPosInf},
                            {{0.5, 0, 0}, {1, 0.5, 1}, -1.0, 0.5},
                            {{0, 0.5, 0}, {1, 1, 1}, 0.0, kPosInf},
                            {{0, 0, 0}, {1, 1, 1}, 50.0, kPosInf}};
    const PpDiagnostics d = poisson_pp_diagnostics(lists, boxes, f);
    for (int b = 0; b < 3; ++b) {
        CHECK(std::abs(d.boxes[b].mean - d.boxes[b].expected) < 3 * d.boxes[b].se + 1e-12);
        CHECK(d.boxes[b].dispersion > 0.8);
        CHECK(d.boxes[b].dispersion < 1.2);
    }
    CHECK(d.boxes[3].mean == 0.0);
    CHECK(d.boxes[3].expected < 1e-20);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) CHECK(std::abs(d.correlation[a][b]) < 0.15);
    CHECK_THROWS_AS(poisson_pp_diagnostics(std::span(lists).first(50), boxes, f), DomainError);
}

TEST_CASE("ks distance") {
    std::mt19937_64 rng(9);
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> s(10000);
    for (auto& x : s) x = ex(rng);
    CHECK(ks_distance(s, [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-x); }) < 0.02);
    std::vector<double> c(100, 0.0);
    CHECK(ks_distance(c, [](double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }) == rel(0.5));
    const std::vector<double> steps{1.0, 2.0, 2.0, 3.0};
    auto step = [](double x) { return x < 1 ? 0.0 : x < 2 ? 0.25 : x < 3 ? 0.75 : 1.0; };
    CHECK(ks_distance(steps, step) == 0.0);
    CHECK_THROWS_AS(ks_distance(std::vector<double>{1.0}, step), DomainError);
}

TEST_CASE("chen-stein gap and poisson cdf") {
    CHECK(poisson_cdf(0, 1.0) == rel(std::exp(-1.0)));
    CHECK(poisson_cdf(2, 2.0) == rel(5.0 * std::exp(-2.0)));

    std::mt19937_64 rng(10);
    const SubcubeGrid g = SubcubeGrid::make(2, 1e4, 1e4);
    std::vector<ReplicationResult> reps;
    for (int k = 0; k < 300; ++k) reps.push_back(summarize_replication(synthetic_cells(1000, 100.0, rng), g, Orientation::Max, 1e4, k, 3, 64));
    FamilyParams fp;
    fp.rho = 1e4;
    ThresholdFamily f = threshold_family(Experiment::DelaunayMaxArea, fp);
    // Uniform scores: v(t) = 1 - e^-t / 1000 gives tau(t) = e^-t exactly.
    f.a = 1.0;
    f.b = 0.0;
    f.v_fn = [](double t) { return 1.0 - std::exp(-t) / 1000.0; };
    f.t_fn = [](double v) { return -std::log(1000.0 * (1.0 - v)); };
    f.affine = false;
    for (double t : {-0.5, 0.0, 1.0}) {
        const GapResult r1 = chen_stein_gap(reps, f, 1, t);
        std::size_t none = 0;
        for (const auto& r : reps) none += exceedance_counts(r, f.v(t)).u == 0;
        CHECK(r1.gap == rel(std::abs(static_cast<double>(none) / 300.0 - std::exp(-std::exp(-t)))));
        CHECK(r1.gap < 4 * r1.se + 0.02);
        for (int r = 2; r <= 3; ++r) CHECK(chen_stein_gap(reps, f, r, t).gap < 0.08);
    }
    // tau = 0: nothing exceeds.
    const GapResult zero = chen_stein_gap(reps, f, 1, 50.0);
    CHECK(zero.gap < 1e-9);
    CHECK_THROWS_AS(chen_stein_gap(std::span(reps).first(100), f, 1, 0.0), DomainError);
}

TEST_CASE("extremal index on synthetic controls") {
    // I.i.d. exceedances: P(no exceedance) = e^-tau.
    std::mt19937_64 rng(11);
    const std::size_t n = 20000;
    std::size_t none = 0;
    std::poisson_distribution<int> pois(1.0);
    for (std::size_t k = 0; k < n; ++k) none += pois(rng) == 0;
    const ExtremalIndex e = extremal_index_from_probability(n, none, 1.0);
    CHECK(e.theta > 0.9);
    CHECK(e.theta < 1.1);
    CHECK(e.lower < 1.0);
    CHECK(e.upper > 1.0);
    // Pairs of exceedances: Poisson(tau/2) clusters of size two give theta = 1/2.
    std::poisson_distribution<int> half(0.5);
    none = 0;
    for (std::size_t k = 0; k < n; ++k) none += half(rng) == 0;
    CHECK(extremal_index_from_probability(n, none, 1.0).theta == rel(0.5).epsilon(0.06));
    CHECK_THROWS_AS(extremal_index_from_probability(100, 0, 1.0), DivergenceError);
}

TEST_CASE("trend verdicts") {
    const std::vector<double> rhos{1e3, 1e4, 1e5};
    CHECK(trend_verdict(rhos, std::vector<double>{0.1, 0.1, 0.1}) == Trend::Flat);
    CHECK(trend_verdict(rhos, std::vector<double>{0.1, 0.03, 0.01}) == Trend::Decreasing);
    CHECK(trend_verdict(rhos, std::vector<double>{0.01, 0.03, 0.1}) == Trend::Increasing);
    CHECK(trend_verdict(rhos, std::vector<double>{80, 81, 80.5}, true) == Trend::NonVanishing);
    CHECK(trend_verdict(rhos, std::vector<double>{0.5, 0.02, 0.015}) == Trend::NonVanishing);
    CHECK(trend_verdict(rhos, std::vector<double>{0.5, 0.6, 0.01}) == Trend::Irregular);
    CHECK(trend_name(Trend::NonVanishing) == "non-vanishing");
    CHECK_THROWS_AS(trend_verdict(std::vector<double>{1e3, 1e4}, std::vector<double>{1, 2}), DomainError);
}

TEST_CASE("g2 estimators") {
    std::mt19937_64 rng(12);
    const SubcubeGrid g = SubcubeGrid::make(2, 1e4, 1e4);
    std::vector<ReplicationResult> reps;
    for (int k = 0; k < 50; ++k) reps.push_back(summarize_replication(synthetic_cells(1000, 100.0, rng), g, Orientation::Max, 1e4, k, 3, 1000));
    CHECK(g2_from_window(reps, g, kPosInf).value == 0.0);
    // Independent uniform exceedances: G2 = N (m(m-1)) |c|^2 / |W|^2 on average.
    const double v = 0.99;  // about 10 exceedances per replication
    const G2Estimate est = g2_from_window(reps, g, v);
    const double c = g.patch_side();
    const double expect = static_cast<double>(g.n_rho) * 10.0 * 10.0 * std::pow(c / 100.0, 4);
    CHECK(std::abs(est.value - expect) < 4 * est.se + 0.15 * expect);

    const ExperimentConfig cfg = small_config(Experiment::DelaunayMinCircumradius, 1e3, 1);
    CHECK(estimate_g2(cfg, Experiment::DelaunayMinCircumradius, 1e3, kNegInf, 20, 5).value == 0.0);
}

TEST_CASE("run_experiment basics") {
    ExperimentConfig cfg = small_config(Experiment::DelaunayMaxArea, 1e4, 0);
    CHECK(run_experiment(cfg).empty());
    cfg.replications = 6;
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    REQUIRE(a.size() == 6);
    double cells = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].order_stats == b[i].order_stats);
        CHECK(a[i].subcube_max == b[i].subcube_max);
        cells += static_cast<double>(a[i].cell_count);
    }
    CHECK(cells / 6.0 == rel(1e4).epsilon(0.02));
    // Thread count does not change results.
    cfg.threads = 3;
    const auto c = run_experiment(cfg);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].order_stats == c[i].order_stats);
}

TEST_CASE("local circumradius search matches the full triangulation") {
    ExperimentConfig cfg = small_config(Experiment::DelaunayMinCircumradius, 1e4, 40, 17);
    const ThresholdFamily f = family_for(cfg, Experiment::DelaunayMinCircumradius, 1e4, {});
    // Same samples: the full run uses the local search cap as its margin.
    cfg.margin = std::sqrt(f.v(f.tau_inverse(cfg.local_tau_max)));
    const auto full = run_experiment(cfg);
    cfg.method = Method::Local;
    const auto local = run_experiment(cfg);
    REQUIRE(full.size() == local.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        CHECK_FALSE(local[i].complete);
        for (int r = 0; r < cfg.order_max; ++r) {
            if (local[i].order_stats[r] == kNegInf) continue;
            CHECK(local[i].order_stats[r] == rel(full[i].order_stats[r]).epsilon(1e-9));
        }
        for (double tau : {0.5, 1.0, 4.0}) {
            const double v = f.v(f.tau_inverse(tau));
            // Counts agree away from the last-bit ties between the two circumradius routes.
            const auto a = exceedance_counts(full[i], v * (1 + 1e-12)), b = exceedance_counts(local[i], v * (1 + 1e-12));
            CHECK(a.u == b.u);
            CHECK(a.u_prime == b.u_prime);
        }
    }
}

TEST_CASE("exceedance deficit is bounded by G2") {
    const ExperimentConfig cfg = small_config(Experiment::DelaunayMinCircumradius, 1e4, 150, 23);
    const auto reps = run_experiment(cfg);
    const ThresholdFamily f = family_for(cfg, Experiment::DelaunayMinCircumradius, 1e4, {});
    const double v = f.v_of_tau(1.0);
    std::vector<double> diff;
    for (const auto& r : reps) {
        const auto c = exceedance_counts(r, v);
        CHECK(c.u_prime <= c.u);
        diff.push_back(static_cast<double>(c.u) - static_cast<double>(c.u_prime));
    }
    double mean = 0.0, ss = 0.0;
    for (double x : diff) mean += x / static_cast<double>(diff.size());
    for (double x : diff) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / (diff.size() - 1.0) / diff.size());
    const G2Estimate g2 = g2_from_window(reps, grid_for(cfg, cfg.experiment, 1e4), v);
    CHECK(mean <= g2.value + 3 * (se + g2.se));
}
