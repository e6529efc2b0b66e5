#include "tess/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tess/errors.hpp"

namespace tess {

long long n_rho(double effective_rho, double rho) {
    if (!(rho > 1.0)) throw DomainError("rho must exceed 1");
    return std::max(1LL, static_cast<long long>(std::floor(effective_rho / (2.0 * std::log(rho)))));
}

double default_dependency_range(int d) { return 2.0 * (std::floor(std::sqrt(static_cast<double>(d))) + 1.0); }

SubcubeGrid SubcubeGrid::make(int d, double rho, double effective_rho, double dependency_range) {
    SubcubeGrid g;
    g.d = d;
    g.side = std::pow(rho, 1.0 / d);
    g.n_rho = tess::n_rho(effective_rho, rho);
    int k = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(g.n_rho), 1.0 / d))));
    while (std::pow(k + 1.0, d) <= static_cast<double>(g.n_rho)) ++k;
    while (k > 1 && std::pow(static_cast<double>(k), d) > static_cast<double>(g.n_rho)) --k;
    g.per_axis = k;
    g.cell = g.side / k;
    g.dependency_range = dependency_range;
    return g;
}

std::size_t SubcubeGrid::count() const {
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) n *= static_cast<std::size_t>(per_axis);
    return n;
}

std::size_t SubcubeGrid::index(std::span<const double> x) const {
    std::size_t idx = 0;
    for (int k = d - 1; k >= 0; --k) {
        const long c = std::clamp(static_cast<long>(std::floor(x[k] / cell)), 0L, static_cast<long>(per_axis) - 1);
        idx = idx * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(c);
    }
    return idx;
}

double SubcubeGrid::patch_side() const {
    return (2.0 * dependency_range + 1.0) * side * std::pow(static_cast<double>(n_rho), -1.0 / d);
}

ReplicationResult summarize_replication(const ScoredCells& cells, const SubcubeGrid& grid, Orientation o,
                                        double rho, std::uint64_t seed, std::size_t order_max,
                                        std::size_t tail_keep) {
    ReplicationResult r;
    r.seed = seed;
    r.orientation = o;
    r.d = grid.d;
    r.rho = rho;
    r.window_side = grid.side;
    r.cell_count = cells.scores.size();
    r.excluded = cells.excluded;
    r.subcube_max.assign(grid.count(), kNegInf);

    const std::size_t n = cells.scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto val = [&](std::size_t i) { return r.oriented(cells.scores[i]); };
    for (std::size_t i = 0; i < n; ++i) {
        double& m = r.subcube_max[grid.index(cells.nuclei[i])];
        m = std::max(m, val(i));
    }
    for (double m : r.subcube_max) r.nonempty_subcubes += m > kNegInf;

    const std::size_t keep = std::min(n, std::max(tail_keep, order_max));
    auto desc = [&](std::size_t a, std::size_t b) { return val(a) > val(b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), desc);
    r.tail.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) r.tail.push_back({cells.nuclei[idx[i]], val(idx[i])});
    r.tail_floor = keep < n ? r.tail.back().value : kNegInf;

    r.order_stats.assign(order_max, kNegInf);
    for (std::size_t i = 0; i < std::min(order_max, keep); ++i) r.order_stats[i] = r.tail[i].value;
    return r;
}

ExceedanceCounts exceedance_counts(const ReplicationResult& rep, double v) {
    const double w = rep.oriented(v);
    ExceedanceCounts c;
    if (w < rep.tail_floor) {
        if (w == kNegInf && rep.complete) {
            c.u = rep.cell_count;
            c.u_prime = rep.nonempty_subcubes;
            return c;
        }
        throw PrecisionError("threshold lies below the retained tail");
    }
    for (const auto& cell : rep.tail) {
        if (cell.value <= w) break;
        ++c.u;
    }
    for (double m : rep.subcube_max) c.u_prime += m > w;
    return c;
}

std::vector<PhiPoint> exceedance_point_process(const ReplicationResult& rep, const ThresholdFamily& family,
                                               double t_floor) {
    if (!family.affine) throw UnsupportedFamily("exceedance point process needs an affine threshold family");
    if (rep.oriented(family.v(t_floor)) < rep.tail_floor)
        throw PrecisionError("score floor lies below the retained tail");
    std::vector<PhiPoint> out;
    const bool is_max = family.orientation == Orientation::Max;
    for (const auto& cell : rep.tail) {
        const double t = family.normalize(rep.raw(cell.value));
        if (is_max ? !(t > t_floor) : !(t < t_floor)) break;
        PhiPoint p;
        for (int k = 0; k < rep.d; ++k) p.position[k] = cell.nucleus[k] / rep.window_side;
        p.t = t;
        out.push_back(p);
    }
    return out;
}

PpDiagnostics poisson_pp_diagnostics(std::span<const std::vector<PhiPoint>> lists, std::span<const PhiBox> boxes,
                                     const ThresholdFamily& family) {
    if (lists.size() < 100) throw DomainError("point-process diagnostics need at least 100 replications");
    const std::size_t n = lists.size(), m = boxes.size();
    const bool is_max = family.orientation == Orientation::Max;
    std::vector<std::vector<double>> counts(m, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        for (const auto& p : lists[r]) {
            for (std::size_t b = 0; b < m; ++b) {
                const auto& B = boxes[b];
                bool in = is_max ? (p.t > B.s && p.t <= B.t) : (p.t >= B.s && p.t < B.t);
                for (int k = 0; k < family.d && in; ++k)
                    in = p.position[k] >= B.lower[k] && p.position[k] < B.upper[k];
                if (in) counts[b][r] += 1.0;
            }
        }
    }
    PpDiagnostics out;
    std::vector<double> means(m), sds(m);
    for (std::size_t b = 0; b < m; ++b) {
        const auto& B = boxes[b];
        double vol = 1.0;
        for (int k = 0; k < family.d; ++k) vol *= B.upper[k] - B.lower[k];
        auto tau_at = [&](double t) {
            if (std::isinf(t)) return (t > 0) == is_max ? 0.0 : kPosInf;
            return family.tau(t);
        };
        BoxDiagnostics bd;
        bd.expected = vol * std::abs(tau_at(B.s) - tau_at(B.t));
        const auto& c = counts[b];
        bd.mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double x : c) ss += (x - bd.mean) * (x - bd.mean);
        bd.variance = ss / static_cast<double>(n - 1);
        bd.se = std::sqrt(bd.variance / static_cast<double>(n));
        bd.dispersion = bd.mean > 0.0 ? bd.variance / bd.mean : 0.0;
        means[b] = bd.mean;
        sds[b] = std::sqrt(bd.variance);
        out.boxes.push_back(bd);
    }
    out.correlation.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a) {
        out.correlation[a][a] = 1.0;
        for (std::size_t b = a + 1; b < m; ++b) {
            if (sds[a] == 0.0 || sds[b] == 0.0) continue;
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += (counts[a][r] - means[a]) * (counts[b][r] - means[b]);
            const double rho = s / static_cast<double>(n - 1) / (sds[a] * sds[b]);
            out.correlation[a][b] = out.correlation[b][a] = rho;
        }
    }
    return out;
}

double poisson_cdf(std::size_t r_minus_one, double tau) {
    double term = std::exp(-tau), acc = term;
    for (std::size_t k = 1; k <= r_minus_one; ++k) {
        term *= tau / static_cast<double>(k);
        acc += term;
    }
    return acc;
}

GapResult chen_stein_gap(std::span<const ReplicationResult> results, const ThresholdFamily& family, int r,
                         double t) {
    if (results.size() < 200) throw DomainError("Chen-Stein gap needs at least 200 replications");
    if (r < 1) throw DomainError("order must be positive");
    const double v = family.v(t);
    std::size_t hits = 0;
    for (const auto& rep : results) hits += exceedance_counts(rep, v).u <= static_cast<std::size_t>(r - 1);
    GapResult g;
    const double n = static_cast<double>(results.size());
    g.tau = family.tau(t);
    g.p_hat = static_cast<double>(hits) / n;
    g.target = poisson_cdf(static_cast<std::size_t>(r - 1), g.tau);
    g.gap = std::abs(g.p_hat - g.target);
    g.se = std::sqrt(std::max(g.p_hat * (1.0 - g.p_hat), 1.0 / n) / n);
    return g;
}

ExtremalIndex extremal_index_from_probability(std::size_t n, std::size_t none, double tau, double z) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (none == 0) throw DivergenceError("no replication stayed below the threshold; raise replications or lower tau");
    ExtremalIndex e;
    e.tau = tau;
    e.p_hat = static_cast<double>(none) / static_cast<double>(n);
    e.theta = -std::log(e.p_hat) / tau;
    e.se = std::sqrt((1.0 - e.p_hat) / (static_cast<double>(n) * e.p_hat)) / tau;
    e.lower = std::max(0.0, e.theta - z * e.se);
    e.upper = e.theta + z * e.se;
    return e;
}

ExtremalIndex estimate_extremal_index(std::span<const ReplicationResult> results, const ThresholdFamily& family,
                                      double tau, double z) {
    if (results.size() < 500) throw DomainError("extremal index needs at least 500 replications");
    const double v = family.v_of_tau(tau);
    std::size_t none = 0;
    double su = 0.0, sup = 0.0;
    for (const auto& rep : results) {
        const auto c = exceedance_counts(rep, v);
        none += c.u == 0;
        su += static_cast<double>(c.u);
        sup += static_cast<double>(c.u_prime);
    }
    ExtremalIndex e = extremal_index_from_probability(results.size(), none, tau, z);
    e.threshold = v;
    e.theta_blocks = su > 0.0 ? sup / su : 0.0;
    return e;
}

G2Estimate g2_from_window(std::span<const ReplicationResult> results, const SubcubeGrid& grid, double v) {
    G2Estimate g;
    g.samples = results.size();
    if (results.empty()) return g;
    const double c = grid.patch_side(), L = grid.side;
    std::vector<double> per_rep;
    per_rep.reserve(results.size());
    std::vector<const TailCell*> ex;
    for (const auto& rep : results) {
        const double w = rep.oriented(v);
        if (w < rep.tail_floor) throw PrecisionError("threshold lies below the retained tail");
        ex.clear();
        for (const auto& cell : rep.tail) {
            if (cell.value <= w) break;
            ex.push_back(&cell);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < ex.size(); ++i) {
            for (std::size_t j = 0; j < ex.size(); ++j) {
                if (i == j) continue;
                double num = 1.0, den = 1.0;
                for (int k = 0; k < grid.d; ++k) {
                    const double dk = std::abs(ex[i]->nucleus[k] - ex[j]->nucleus[k]);
                    num *= std::max(0.0, c - dk);
                    den *= std::max(0.0, L - dk);
                }
                if (num > 0.0 && den > 0.0) {
                    s += num / den;
                    ++g.pairs;
                }
            }
        }
        per_rep.push_back(static_cast<double>(grid.n_rho) * s);
    }
    const double n = static_cast<double>(per_rep.size());
    g.value = std::accumulate(per_rep.begin(), per_rep.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : per_rep) ss += (x - g.value) * (x - g.value);
    g.se = per_rep.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return g;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.size() < 2) throw DomainError("KS distance needs at least 2 samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size();) {
        std::size_t j = i;
        while (j < x.size() && x[j] == x[i]) ++j;
        const double below = static_cast<double>(i) / n, at = static_cast<double>(j) / n;
        d = std::max(d, std::abs(at - cdf(x[i])));
        d = std::max(d, std::abs(below - cdf(std::nextafter(x[i], kNegInf))));
        i = j;
    }
    return d;
}

std::string_view trend_name(Trend t) {
    switch (t) {
        case Trend::Decreasing: return "decreasing";
        case Trend::Increasing: return "increasing";
        case Trend::Flat: return "flat";
        case Trend::NonVanishing: return "non-vanishing";
        case Trend::Irregular: return "irregular";
    }
    return "irregular";
}

Trend trend_verdict(std::span<const double> rhos, std::span<const double> values, bool should_vanish) {
    if (values.size() < 3 || rhos.size() != values.size()) throw DomainError("trend needs at least 3 rho values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    const bool flat = scale == 0.0 || (*hi - *lo) <= 0.05 * scale;

    bool dec = true, inc = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        dec = dec && values[i] < values[i - 1];
        inc = inc && values[i] > values[i - 1];
    }
    const std::size_t m = values.size();
    double slope = 0.0;
    if (values[m - 1] > 0.0 && values[m - 2] > 0.0)
        slope = std::log(values[m - 1] / values[m - 2]) / std::log(rhos[m - 1] / rhos[m - 2]);
    else if (values[m - 1] <= 0.0 && values[m - 2] > 0.0)
        slope = -kPosInf;

    if (dec && slope <= -0.2) return Trend::Decreasing;
    if (should_vanish) return slope > -0.2 && *lo > 0.0 ? Trend::NonVanishing : Trend::Irregular;
    if (flat) return Trend::Flat;
    if (inc) return Trend::Increasing;
    if (slope > -0.2) return Trend::NonVanishing;
    return Trend::Irregular;
}

}  // namespace tess
