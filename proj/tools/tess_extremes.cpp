// tess-extremes: simulate random tessellations and compare their extremes
// with the limiting laws.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "tess/errors.hpp"
#include "tess/experiment.hpp"
#include "tess/io.hpp"
#include "tess/laws.hpp"
#include "tess/report.hpp"

namespace fs = std::filesystem;
using namespace tess;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitCheck = 2;
constexpr int kExitResource = 3;
constexpr int kExitOther = 4;

const char* kFormats = R"(Output files (floats carry 17 significant digits):
  <experiment>_rho<rho>.json   results: config, constants, per-replication order
                               statistics, retained tail, summary (KS, gaps, theta, G2)
  <experiment>_rho<rho>.csv    replicate,seed,cell_count,excluded,order,score,normalized
  <experiment>_rho<rho>_phi.csv  replicate,x,y,score   (exceedance point process, affine families)
  trend_<experiment>.csv       rho,replications,gap,gap_se,g2,g2_se,ks
  laws_d<d>.csv                v,circumradius_cdf,inradius_survival[,area_survival]
  cells_delaunay.csv           triangle,v0,v1,v2,cx,cy,R,area          (run --dump)
  cells_voronoi.csv            x,y,r,D,flower,N,bounded                (run --dump)
Exit codes: 0 ok, 1 configuration error, 2 --check violation, 3 resource limit.
The Monte Carlo constants cache lives at $TESS_EXTREMES_CACHE (default <out>/constants_cache.json).)";

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
};

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream o;
    o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return o.str();
}

ExperimentConfig load(const Common& c) {
    if (c.config.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = load_config(c.config);
    if (c.seed) cfg.master_seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    if (!c.out.empty()) cfg.output_dir = c.out;
    return cfg;
}

std::string rho_tag(double rho) {
    std::ostringstream o;
    o << std::setprecision(6) << rho;
    return o.str();
}

McConstants constants_for(const ExperimentConfig& cfg) {
    ConstantsCache cache(ConstantsCache::default_path(fs::path(cfg.output_dir) / "constants_cache.json"));
    return constants_with_cache(cfg, cache);
}

void print_summary(const Summary& s) {
    std::cout << experiment_name(s.experiment) << "  rho=" << s.rho << "  replications=" << s.replications
              << "  mean cells=" << s.mean_cells << '\n';
    if (s.ks) {
        std::cout << "  KS vs limit law: " << *s.ks;
        if (s.ks_low) std::cout << "  (constant +-2se: " << *s.ks_low << " .. " << *s.ks_high << ')';
        std::cout << '\n';
    }
    for (const auto& g : s.gaps)
        std::cout << "  r=" << g.r << " t=" << g.t << " tau=" << g.gap.tau << "  P=" << g.gap.p_hat
                  << "  target=" << g.gap.target << "  gap=" << g.gap.gap << " (se " << g.gap.se << ")\n";
    if (s.theta)
        std::cout << "  theta=" << s.theta->theta << "  [" << s.theta->lower << ", " << s.theta->upper
                  << "]  blocks=" << s.theta->theta_blocks << '\n';
    if (s.g2) std::cout << "  G2=" << s.g2->value << " (se " << s.g2->se << ")\n";
    std::cout << "  mean U=" << s.mean_u << "  mean U'=" << s.mean_u_prime << '\n';
}

int cmd_laws(int d, const std::string& experiment, double rho, const std::string& out) {
    const LawSet L = constants(d);
    std::cout << std::setprecision(12);
    std::cout << "d = " << d << '\n'
              << "kappa_d = " << L.kappa << '\n'
              << "beta_d = " << L.beta << '\n'
              << "delta_d = " << L.delta << '\n'
              << "delta'_d = " << L.delta_prime << '\n'
              << "alpha_d1 = " << L.alpha1 << '\n'
              << "alpha_d6 = " << L.alpha6 << '\n';
    if (d == 2) std::cout << "alpha_2 = " << L.alpha2 << '\n' << "alpha_3 = " << L.alpha3 << '\n';
    if (d <= 3) std::cout << "theta (max circumradius) = " << extremal_index_delaunay_max_R(d) << '\n';
    if (!experiment.empty()) {
        const Experiment e = parse_experiment(experiment);
        FamilyParams p;
        p.d = d;
        p.rho = rho;
        if (e == Experiment::GpMaxInradius) p.gp = {2.0 / 3.0, 0.0, 0.5, 0.5};
        // The farthest-neighbour constant equals pi^3/24 in the plane (a triangle of three
        // symmetric points covers the origin with probability 1/4).
        if (e == Experiment::VoronoiMinFarthest) p.alpha4 = std::pow(std::numbers::pi, 3) / 24.0;
        if (e == Experiment::VoronoiMinFlower) {
            const McValue a5 = estimate_alpha5(200'000, 1);
            std::cout << "alpha_25 = " << a5.value << " +- " << a5.se << " (Monte Carlo, " << a5.samples
                      << " cells)\n";
            p.alpha5 = a5.value;
        }
        const ThresholdFamily f = threshold_family(e, p);
        std::cout << "experiment = " << experiment << "  rho = " << rho << '\n'
                  << "theta = " << f.theta << '\n';
        if (f.affine) std::cout << "a_rho = " << f.a << "\nb_rho = " << f.b << '\n';
        std::cout << "t,v_rho(t),tau(t),limit_cdf(t)\n";
        for (double t : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0})
            std::cout << t << ',' << f.v(t) << ',' << f.tau(t) << ',' << f.limit_cdf(t) << '\n';
    }
    const fs::path path = fs::path(out.empty() ? "." : out) / ("laws_d" + std::to_string(d) + ".csv");
    write_atomic(path, laws_csv(d));
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_run(const Common& c, bool check, bool dump);
int cmd_trend(const Common& c);

int run_single(const ExperimentConfig& cfg, bool check, bool dump) {
    const McConstants k = constants_for(cfg);
    const double rho = cfg.rhos.front();
    ResultSet set;
    if (cfg.replications > 0) set = run_group(cfg, rho, k);
    bool ok = true;
    for (auto& [e, results] : set) {
        ExperimentConfig ec = cfg;
        ec.experiment = e;
        ec.companions.clear();
        ResultsDocument doc{ec, e, rho, k, results, summarize(ec, e, rho, results, k)};
        print_summary(doc.summary);
        const std::string stem = std::string(experiment_name(e)) + "_rho" + rho_tag(rho);
        const fs::path dir(cfg.output_dir);
        write_atomic(dir / (stem + ".json"), results_to_json(doc, now_utc()).dump(1) + "\n");
        const ThresholdFamily f = family_for(ec, e, rho, k);
        write_atomic(dir / (stem + ".csv"), replications_csv(results, f));
        if (f.affine) {
            std::vector<std::vector<PhiPoint>> phi;
            const double floor_t = f.tau_inverse(std::min(50.0, 0.5 * static_cast<double>(cfg.tail_keep)));
            for (const auto& r : results) {
                try {
                    phi.push_back(exceedance_point_process(r, f, floor_t));
                } catch (const PrecisionError&) {
                    phi.push_back({});
                }
            }
            write_atomic(dir / (stem + "_phi.csv"), phi_csv(phi));
        }
        if (check) {
            const CheckOutcome o = check_summary(doc.summary);
            for (const auto& v : o.violations) std::cerr << "check failed: " << experiment_name(e) << ": " << v << '\n';
            ok = ok && o.ok;
        }
    }
    if (dump && cfg.replications > 0) {
        const double side = std::sqrt(rho);
        const double margin = cfg.margin.value_or(default_margin(2, rho));
        const std::uint64_t seed = derive_seed(cfg.master_seed, 0);
        const PointSample s = sample_poisson(Region::cube(2, side, margin), process_intensity(cfg, cfg.experiment), seed);
        const Triangulation t = triangulate(s);
        write_atomic(fs::path(cfg.output_dir) / "cells_delaunay.csv", triangulation_csv(t));
        VoronoiOptions opt;
        opt.margin = margin;
        const auto cells = voronoi_cells_in_window(t, s.region, opt);
        write_atomic(fs::path(cfg.output_dir) / "cells_voronoi.csv", voronoi_csv(cells));
    }
    return ok ? 0 : kExitCheck;
}

int cmd_run(const Common& c, bool check, bool dump) {
    const ExperimentConfig cfg = load(c);
    if (cfg.rhos.size() > 1) return cmd_trend(c);
    return run_single(cfg, check, dump);
}

int cmd_trend(const Common& c) {
    const ExperimentConfig cfg = load(c);
    if (cfg.rhos.size() < 3) throw ConfigError("trend needs at least 3 rho values");
    const McConstants k = constants_for(cfg);
    std::vector<double> gaps, g2s, rhos = cfg.rhos;
    std::ostringstream csv;
    csv << "rho,replications,gap,gap_se,g2,g2_se,ks\n";
    for (double rho : rhos) {
        const auto set = run_group(cfg, rho, k);
        const auto& results = set.at(cfg.experiment);
        const ThresholdFamily f = family_for(cfg, cfg.experiment, rho, k);
        const double t = cfg.t_grid.empty() ? f.tau_inverse(cfg.tau) : cfg.t_grid.front();
        const GapResult g = chen_stein_gap(results, f, 1, t);
        const G2Estimate g2 = g2_from_window(results, grid_for(cfg, cfg.experiment, rho), f.v_of_tau(cfg.tau));
        const auto norm = normalized_extremes(results, f);
        const double ks = ks_distance(norm, [&](double x) { return f.limit_cdf(x); });
        gaps.push_back(g.gap);
        g2s.push_back(g2.value);
        csv << fmt17(rho) << ',' << results.size() << ',' << fmt17(g.gap) << ',' << fmt17(g.se) << ','
            << fmt17(g2.value) << ',' << fmt17(g2.se) << ',' << fmt17(ks) << '\n';
        std::cout << "rho=" << rho << "  gap=" << g.gap << " (se " << g.se << ")  G2=" << g2.value << " (se "
                  << g2.se << ")  KS=" << ks << '\n';
    }
    std::cout << "gap trend: " << trend_name(trend_verdict(rhos, gaps)) << '\n'
              << "G2 trend: " << trend_name(trend_verdict(rhos, g2s, true)) << '\n';
    write_atomic(fs::path(cfg.output_dir) / ("trend_" + std::string(experiment_name(cfg.experiment)) + ".csv"),
                 csv.str());
    return 0;
}

int cmd_g2(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const McConstants k = constants_for(cfg);
    for (double rho : cfg.rhos) {
        const ThresholdFamily f = family_for(cfg, cfg.experiment, rho, k);
        const double v = f.v_of_tau(cfg.tau);
        const G2Estimate g = estimate_g2(cfg, cfg.experiment, rho, v, cfg.g2_patches,
                                         derive_seed(master_for_rho(cfg.master_seed, rho), 0x62));
        std::cout << "rho=" << rho << "  tau=" << cfg.tau << "  G2=" << g.value << " (se " << g.se
                  << ", patches " << g.samples << ", pairs " << g.pairs << ")\n";
    }
    return 0;
}

int cmd_extremal_index(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const McConstants k = constants_for(cfg);
    const double rho = cfg.rhos.front();
    const auto set = run_group(cfg, rho, k);
    const ThresholdFamily f = family_for(cfg, cfg.experiment, rho, k);
    const ExtremalIndex e = estimate_extremal_index(set.at(cfg.experiment), f, cfg.tau);
    std::cout << experiment_name(cfg.experiment) << "  rho=" << rho << "  tau=" << cfg.tau << "  theta=" << e.theta
              << "  95% CI [" << e.lower << ", " << e.upper << "]  P(no exceedance)=" << e.p_hat
              << "  blocks=" << e.theta_blocks << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extreme-value experiments on random tessellations"};
    app.footer(kFormats);
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "experiment config (JSON)");
        sub->add_option("--seed", common.seed, "override the master seed");
        sub->add_option("--threads", common.threads, "worker threads (default: available parallelism)");
        sub->add_option("--out", common.out, "output directory");
    };

    int d = 2;
    std::string experiment;
    double rho = 1e4;
    auto* laws = app.add_subcommand("laws", "print constants and typical-cell laws");
    laws->add_option("--d", d, "dimension (1..6)");
    laws->add_option("--experiment", experiment, "also print this experiment's threshold family");
    laws->add_option("--rho", rho, "rho for the threshold family");
    laws->add_option("--out", common.out, "directory for laws_d<d>.csv");

    bool check = false, dump = false;
    auto* run = app.add_subcommand("run", "run replications and write results");
    add_common(run);
    run->add_flag("--check", check, "exit 2 if an acceptance tolerance is violated");
    run->add_flag("--dump", dump, "write cell tables of the first replication");

    auto* trend = app.add_subcommand("trend", "Chen-Stein gap, G2 and KS across a list of rho");
    add_common(trend);
    auto* g2 = app.add_subcommand("g2", "patch estimate of G2 at v_rho(tau)");
    add_common(g2);
    auto* xi = app.add_subcommand("extremal-index", "estimate the extremal index at tau");
    add_common(xi);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (laws->parsed()) return cmd_laws(d, experiment, rho, common.out);
        if (run->parsed()) return cmd_run(common, check, dump);
        if (trend->parsed()) return cmd_trend(common);
        if (g2->parsed()) return cmd_g2(common);
        if (xi->parsed()) return cmd_extremal_index(common);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return 0;
}
