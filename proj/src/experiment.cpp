#include "tess/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tess/delaunay.hpp"
#include "tess/errors.hpp"
#include "tess/voronoi.hpp"

namespace tess {

namespace {

enum class Group { Delaunay, Voronoi, NearestNeighbor, GaussPoisson };

Group group_of(Experiment e) {
    switch (e) {
        case Experiment::DelaunayMinCircumradius:
        case Experiment::DelaunayMaxArea:
        case Experiment::DelaunayMinArea:
        case Experiment::DelaunayMaxCircumradius: return Group::Delaunay;
        case Experiment::VoronoiMinFarthest:
        case Experiment::VoronoiMinFlower: return Group::Voronoi;
        case Experiment::VoronoiMinInradius: return Group::NearestNeighbor;
        case Experiment::GpMaxInradius: return Group::GaussPoisson;
    }
    return Group::Delaunay;
}

bool needs_triangulation(Group g) { return g == Group::Delaunay || g == Group::Voronoi; }

}  // namespace

void ExperimentConfig::validate() const {
    if (d < 1 || d > 3) throw ConfigError("d must be 1, 2 or 3");
    const bool inradius_only = experiment == Experiment::VoronoiMinInradius;
    if (d != 2 && !inradius_only) throw ConfigError("only voronoi_min_inradius runs outside the plane");
    if (rhos.empty()) throw ConfigError("at least one rho is required");
    for (double r : rhos)
        if (!(r > 1.0)) throw ConfigError("rho must exceed 1");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (order_max < 1) throw ConfigError("order_max must be positive");
    if (intensity && !(*intensity > 0.0)) throw ConfigError("intensity must be positive");
    if (margin && !(*margin >= 0.0)) throw ConfigError("margin must be nonnegative");
    if (dependency_range && !(*dependency_range > 0.0)) throw ConfigError("dependency_range must be positive");
    if (!(local_tau_max > 0.0)) throw ConfigError("local_tau_max must be positive");
    if (tail_keep < 1) throw ConfigError("tail_keep must be positive");
    if (flower_samples != 0 && flower_samples < 1000) throw ConfigError("flower_samples must be 0 or >= 1000");
    if (alpha4_samples < 1000) throw ConfigError("alpha4_samples must be >= 1000");
    const bool is_gp = experiment == Experiment::GpMaxInradius;
    if (is_gp != gp.has_value())
        throw ConfigError("Gauss-Poisson parameters are required for gp_max_inradius and only there");
    if (gp) {
        try {
            gp->validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    for (Experiment c : companions)
        if (group_of(c) != group_of(experiment))
            throw ConfigError("companion " + std::string(experiment_name(c)) + " needs a different tessellation");
    if (method == Method::Local && (experiment != Experiment::DelaunayMinCircumradius || !companions.empty()))
        throw ConfigError("the local method only serves delaunay_min_circumradius");
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

double process_intensity(const ExperimentConfig& cfg, Experiment e) {
    if (cfg.intensity) return *cfg.intensity;
    switch (group_of(e)) {
        case Group::Delaunay: return constants(cfg.d).beta;
        case Group::GaussPoisson: return cfg.gp ? cfg.gp->intensity() : 1.0;
        default: return 1.0;
    }
}

double default_margin(int d, double rho) {
    return 4.0 * std::pow(std::log(rho) / constants(d).delta, 1.0 / d);
}

SubcubeGrid grid_for(const ExperimentConfig& cfg, Experiment e, double rho) {
    double effective = rho;
    if (e == Experiment::GpMaxInradius && cfg.gp) effective = cfg.gp->gamma_a * (cfg.gp->p1 + cfg.gp->p2) * rho;
    return SubcubeGrid::make(cfg.d, rho, effective, cfg.dependency_range.value_or(default_dependency_range(cfg.d)));
}

std::uint64_t master_for_rho(std::uint64_t master, double rho) {
    return splitmix64(master ^ splitmix64(std::bit_cast<std::uint64_t>(rho)));
}

ThresholdFamily family_for(const ExperimentConfig& cfg, Experiment e, double rho, const McConstants& k) {
    FamilyParams p;
    p.d = cfg.d;
    p.rho = rho;
    if (cfg.gp) p.gp = *cfg.gp;
    if (k.alpha4) p.alpha4 = k.alpha4->value;
    if (k.alpha5) p.alpha5 = k.alpha5->value;
    return threshold_family(e, p);
}

NeighborPmf estimate_neighbor_pmf(std::size_t min_cells, std::uint64_t seed, unsigned threads) {
    // Windows of 2e5 cells, as many as needed.
    const double rho = std::min<double>(2e5, std::max<double>(1e3, static_cast<double>(min_cells)));
    const std::size_t windows = (min_cells + static_cast<std::size_t>(rho) - 1) / static_cast<std::size_t>(rho);
    std::vector<std::map<int, std::size_t>> per(windows);
    parallel_for(windows, threads, [&](std::size_t w) {
        const double side = std::sqrt(rho);
        const PointSample s = sample_poisson(Region::cube(2, side, default_margin(2, rho)), 1.0, derive_seed(seed, w));
        const Triangulation t = triangulate(s);
        VoronoiOptions opt;
        opt.flower = false;
        opt.margin = s.region.padding;
        for (const auto& c : voronoi_cells_in_window(t, s.region, opt))
            if (c.bounded) ++per[w][c.neighbors];
    });
    NeighborPmf out;
    for (const auto& m : per)
        for (const auto& [k, n] : m) {
            out.counts[k] += n;
            out.cells += n;
        }
    for (const auto& [k, n] : out.counts) out.pmf[k] = static_cast<double>(n) / static_cast<double>(out.cells);
    return out;
}

McValue estimate_alpha5(std::size_t min_cells, std::uint64_t seed, unsigned threads) {
    const NeighborPmf pmf = estimate_neighbor_pmf(min_cells, seed, threads);
    const double n = static_cast<double>(pmf.cells);
    const double p = pmf.pmf.contains(3) ? pmf.pmf.at(3) : 0.0;
    return alpha_d5_from_pmf(2, p, std::sqrt(p * (1.0 - p) / n), pmf.cells, seed);
}

void ensure_constants(const ExperimentConfig& cfg, McConstants& k) {
    std::vector<Experiment> all{cfg.experiment};
    all.insert(all.end(), cfg.companions.begin(), cfg.companions.end());
    for (Experiment e : all) {
        if (e == Experiment::VoronoiMinFarthest && !k.alpha4)
            k.alpha4 = alpha_d4_estimate(2, cfg.alpha4_samples, derive_seed(cfg.master_seed, 0xa4));
        if (e == Experiment::VoronoiMinFlower && !k.alpha5)
            k.alpha5 = estimate_alpha5(cfg.alpha5_cells, derive_seed(cfg.master_seed, 0xa5), cfg.threads);
    }
}

ScoredCells local_small_circumradius(const PointSample& sample, double r_max) {
    if (sample.dim != 2) throw DomainError("local circumradius search is planar");
    const Region& reg = sample.region;
    const std::size_t n = sample.size();
    const double h = 2.0 * r_max;
    // Grid of roughly one point per cell but never finer than 2 r_max.
    const double g = std::max(h, 1.0 / std::sqrt(std::max(1e-300, static_cast<double>(n) / reg.sim_volume())));
    const double x0 = reg.sim_lower(0), y0 = reg.sim_lower(1);
    const long nx = std::max(1L, static_cast<long>(std::ceil((reg.sim_upper(0) - x0) / g)));
    const long ny = std::max(1L, static_cast<long>(std::ceil((reg.sim_upper(1) - y0) / g)));
    const double inv_g = 1.0 / g;
    auto cx = [&](double x) { return std::clamp(static_cast<long>((x - x0) * inv_g), 0L, nx - 1); };
    auto cy = [&](double y) { return std::clamp(static_cast<long>((y - y0) * inv_g), 0L, ny - 1); };

    std::vector<std::uint32_t> start(static_cast<std::size_t>(nx * ny) + 1, 0), items(n);
    std::vector<std::uint32_t> cell(n);
    const std::span<const double> xy(sample.coords);
    for (std::size_t i = 0; i < n; ++i) {
        cell[i] = static_cast<std::uint32_t>(cy(xy[2 * i + 1]) * nx + cx(xy[2 * i]));
        ++start[cell[i] + 1];
    }
    for (std::size_t c = 1; c < start.size(); ++c) start[c] += start[c - 1];
    {
        std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) items[fill[cell[i]]++] = static_cast<std::uint32_t>(i);
    }
    auto pt = [&](std::size_t i) { return Point2{xy[2 * i], xy[2 * i + 1]}; };

    // Close pairs (distance < 2 r_max) as (lower, higher), grouped by the lower index.
    // Only cells meeting the square of half-side h around a point are scanned.
    const double h2 = h * h;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = pt(i);
        for (long yy = cy(p.y - h); yy <= cy(p.y + h); ++yy)
            for (long xx = cx(p.x - h); xx <= cx(p.x + h); ++xx) {
                const std::size_t c = static_cast<std::size_t>(yy * nx + xx);
                for (std::uint32_t s = start[c]; s < start[c + 1]; ++s) {
                    const std::uint32_t j = items[s];
                    if (j > i && dist2(p, pt(j)) < h2) pairs.emplace_back(static_cast<std::uint32_t>(i), j);
                }
            }
    }

    ScoredCells out;
    const double r2max = r_max * r_max;
    for (std::size_t lo = 0; lo < pairs.size();) {
        std::size_t hi = lo;
        while (hi < pairs.size() && pairs[hi].first == pairs[lo].first) ++hi;
        const std::uint32_t i = pairs[lo].first;
        const Point2 a = pt(i);
        for (std::size_t p = lo; p < hi; ++p)
            for (std::size_t q = p + 1; q < hi; ++q) {
                const std::uint32_t jb = pairs[p].second, jc = pairs[q].second;
                const Point2 b = pt(jb), c = pt(jc);
                if (dist2(b, c) >= h2) continue;
                const int orient = orient2d(a, b, c);
                if (orient == 0) continue;
                const Point2 z = circumcenter(a, b, c);
                const double R2 = dist2(z, a);
                if (!(R2 < r2max)) continue;
                const double zc[2] = {z.x, z.y};
                if (!reg.in_core(zc)) continue;
                const double R = std::sqrt(R2);
                bool empty = true;
                for (long yy = cy(z.y - R); yy <= cy(z.y + R) && empty; ++yy)
                    for (long xx = cx(z.x - R); xx <= cx(z.x + R) && empty; ++xx) {
                        const std::size_t cc = static_cast<std::size_t>(yy * nx + xx);
                        for (std::uint32_t s = start[cc]; s < start[cc + 1]; ++s) {
                            const std::uint32_t k = items[s];
                            if (k == i || k == jb || k == jc) continue;
                            if (dist2(z, pt(k)) < R2 && incircle_unchecked(a, b, c, pt(k)) * orient > 0) {
                                empty = false;
                                break;
                            }
                        }
                    }
                if (!empty) continue;
                out.nuclei.push_back({z.x, z.y, 0.0});
                out.scores.push_back(R2);
            }
        lo = hi;
    }
    return out;
}

namespace {

double functional_power(double x, int d) {
    switch (d) {
        case 1: return x;
        case 2: return x * x;
        default: return x * x * x;
    }
}

// One replication's sample for the group of `e`.
PointSample draw_sample(const ExperimentConfig& cfg, Experiment e, double rho, double margin, std::uint64_t seed) {
    const double side = std::pow(rho, 1.0 / cfg.d);
    const Region reg = Region::cube(cfg.d, side, margin);
    if (group_of(e) == Group::GaussPoisson) return sample_gauss_poisson(reg, *cfg.gp, seed);
    return sample_poisson(reg, process_intensity(cfg, e), seed);
}

ScoredCells score_delaunay(const Triangulation& t, const Region& window, Experiment e) {
    ScoredCells out;
    for (const auto& c : delaunay_cells_in_window(t, window)) {
        out.nuclei.push_back({c.nucleus.x, c.nucleus.y, 0.0});
        const bool radius = e == Experiment::DelaunayMinCircumradius || e == Experiment::DelaunayMaxCircumradius;
        out.scores.push_back(radius ? c.circumradius * c.circumradius : c.area);
    }
    return out;
}

ScoredCells score_voronoi(const ExperimentConfig& cfg, const Triangulation& t, const Region& window, Experiment e,
                          std::uint64_t seed) {
    ScoredCells out;
    const bool flower = e == Experiment::VoronoiMinFlower;
    VoronoiOptions opt;
    opt.flower = flower && cfg.flower_samples == 0;
    opt.margin = window.padding;
    std::size_t k = 0;
    for (const auto& c : voronoi_cells_in_window(t, window, opt)) {
        if (!c.bounded) {
            ++out.excluded;
            continue;
        }
        out.nuclei.push_back({c.nucleus.x, c.nucleus.y, 0.0});
        if (!flower) {
            out.scores.push_back(c.farthest * c.farthest);
        } else if (cfg.flower_samples == 0) {
            out.scores.push_back(c.flower);
        } else {
            out.scores.push_back(flower_volume(c.polygon, c.nucleus, cfg.flower_samples, derive_seed(seed, k++)).value);
        }
    }
    return out;
}

ScoredCells score_nearest(const PointSample& s, Experiment e) {
    ScoredCells out;
    const double lambda = static_cast<double>(std::max<std::size_t>(1, s.size())) / s.region.sim_volume();
    const NeighborGrid grid(s, std::pow(1.0 / lambda, 1.0 / s.dim));
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto x = s.point(i);
        if (!s.region.in_core(x)) continue;
        std::array<double, 3> z{};
        for (int k = 0; k < s.dim; ++k) z[k] = x[k];
        const double r = 0.5 * grid.nearest_distance(i);
        out.nuclei.push_back(z);
        out.scores.push_back(e == Experiment::GpMaxInradius ? r : functional_power(r, s.dim));
    }
    return out;
}

double local_r_max(const ExperimentConfig& cfg, double rho) {
    const ThresholdFamily f = family_for(cfg, Experiment::DelaunayMinCircumradius, rho, {});
    return std::sqrt(f.v(f.tau_inverse(cfg.local_tau_max)));
}

}  // namespace

ScoredCells score_cells(const ExperimentConfig& cfg, Experiment e, const PointSample& sample) {
    switch (group_of(e)) {
        case Group::Delaunay: return score_delaunay(triangulate(sample), sample.region, e);
        case Group::Voronoi: return score_voronoi(cfg, triangulate(sample), sample.region, e, sample.seed);
        default: return score_nearest(sample, e);
    }
}

ResultSet run_group(const ExperimentConfig& cfg, double rho, const McConstants& k,
                    const std::function<void(std::size_t)>& progress) {
    cfg.validate();
    std::vector<Experiment> exps{cfg.experiment};
    for (Experiment c : cfg.companions)
        if (std::find(exps.begin(), exps.end(), c) == exps.end()) exps.push_back(c);
    std::vector<ThresholdFamily> fams;
    for (Experiment e : exps) fams.push_back(family_for(cfg, e, rho, k));

    const std::uint64_t master = cfg.rhos.size() > 1 ? master_for_rho(cfg.master_seed, rho) : cfg.master_seed;
    const Group g = group_of(cfg.experiment);
    const bool local = cfg.method == Method::Local;
    const double r_max = local ? local_r_max(cfg, rho) : 0.0;
    const double margin = local ? r_max : cfg.margin.value_or(default_margin(cfg.d, rho));

    ResultSet out;
    for (Experiment e : exps) out[e].resize(cfg.replications);
    std::vector<SubcubeGrid> grids;
    for (Experiment e : exps) grids.push_back(grid_for(cfg, e, rho));

    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(master, i);
        const PointSample s = draw_sample(cfg, cfg.experiment, rho, margin, seed);
        if (local) {
            const ScoredCells cells = local_small_circumradius(s, r_max);
            ReplicationResult r = summarize_replication(cells, grids[0], Orientation::Min, rho, seed,
                                                        static_cast<std::size_t>(cfg.order_max),
                                                        std::max(cfg.tail_keep, cells.scores.size()));
            r.complete = false;
            r.tail_floor = std::max(r.tail_floor, -r_max * r_max);
            out[exps[0]][i] = std::move(r);
        } else if (needs_triangulation(g)) {
            const Triangulation t = triangulate(s);
            for (std::size_t j = 0; j < exps.size(); ++j) {
                const ScoredCells cells = g == Group::Delaunay ? score_delaunay(t, s.region, exps[j])
                                                               : score_voronoi(cfg, t, s.region, exps[j], seed);
                out[exps[j]][i] = summarize_replication(cells, grids[j], fams[j].orientation, rho, seed,
                                                        static_cast<std::size_t>(cfg.order_max), cfg.tail_keep);
            }
        } else {
            for (std::size_t j = 0; j < exps.size(); ++j) {
                const ScoredCells cells = score_nearest(s, exps[j]);
                out[exps[j]][i] = summarize_replication(cells, grids[j], fams[j].orientation, rho, seed,
                                                        static_cast<std::size_t>(cfg.order_max), cfg.tail_keep);
            }
        }
        if (progress) {
            const std::size_t n = ++done;
            std::lock_guard lock(progress_mutex);
            progress(n);
        }
    });
    return out;
}

std::vector<ReplicationResult> run_experiment(const ExperimentConfig& cfg, const McConstants& k) {
    if (cfg.replications == 0) return {};
    auto set = run_group(cfg, cfg.rhos.front(), k);
    return std::move(set[cfg.experiment]);
}

G2Estimate estimate_g2(const ExperimentConfig& cfg, Experiment e, double rho, double v, std::size_t patches,
                       std::uint64_t seed) {
    const SubcubeGrid grid = grid_for(cfg, e, rho);
    const double c = grid.patch_side();
    const ThresholdFamily fam = family_for(cfg, e, rho, {});
    const bool local = cfg.method == Method::Local && e == Experiment::DelaunayMinCircumradius;
    const double r_max = local ? std::sqrt(fam.v(fam.tau_inverse(cfg.local_tau_max))) : 0.0;
    if (local && !(v < r_max * r_max)) throw DomainError("threshold exceeds the local search cap");
    const double margin = local ? r_max : cfg.margin.value_or(default_margin(cfg.d, rho));

    std::vector<double> per(patches, 0.0);
    std::vector<std::size_t> pair_count(patches, 0);
    parallel_for(patches, cfg.threads, [&](std::size_t i) {
        const std::uint64_t s = derive_seed(seed, i);
        const Region reg = Region::cube(cfg.d, c, margin);
        const PointSample sample = e == Experiment::GpMaxInradius ? sample_gauss_poisson(reg, *cfg.gp, s)
                                                                  : sample_poisson(reg, process_intensity(cfg, e), s);
        const ScoredCells cells = local ? local_small_circumradius(sample, r_max) : score_cells(cfg, e, sample);
        std::size_t m = 0;
        for (double x : cells.scores) m += fam.exceeds(x, v);
        pair_count[i] = m * (m > 0 ? m - 1 : 0);
        per[i] = static_cast<double>(grid.n_rho) * static_cast<double>(pair_count[i]);
    });
    G2Estimate g;
    g.samples = patches;
    if (patches == 0) return g;
    double sum = 0.0;
    for (std::size_t i = 0; i < patches; ++i) {
        sum += per[i];
        g.pairs += pair_count[i];
    }
    g.value = sum / static_cast<double>(patches);
    double ss = 0.0;
    for (double x : per) ss += (x - g.value) * (x - g.value);
    g.se = patches > 1 ? std::sqrt(ss / static_cast<double>(patches - 1) / static_cast<double>(patches)) : 0.0;
    return g;
}

}  // namespace tess
