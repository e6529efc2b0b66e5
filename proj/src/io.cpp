#include "tess/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "tess/errors.hpp"
#include "tess/laws.hpp"

namespace tess {

using nlohmann::json;

std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

json num(double x) {
    if (std::isfinite(x)) return x;
    return fmt17(x);
}

double as_num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kPosInf;
        if (s == "-inf") return kNegInf;
        if (s == "nan") return std::nan("");
        throw ConfigError("expected a number, got \"" + s + "\"");
    }
    return j.get<double>();
}

const std::set<std::string> kConfigKeys = {
    "experiment", "companions",  "d",        "rho",           "replications", "master_seed",
    "intensity",  "gauss_poisson", "t_grid", "tau",           "order_max",    "mc",
    "margin",     "method",      "local_tau_max", "tail_keep", "dependency_range", "g2_patches",
    "output_dir", "threads"};

// Unsigned fields: a negative JSON number would otherwise wrap around.
template <class T>
T whole(const json& j, const char* key) {
    const json& x = j.at(key);
    if constexpr (std::is_unsigned_v<T>)
        if (!x.is_number_unsigned()) throw ConfigError(std::string(key) + " must be a non-negative integer");
    return x.get<T>();
}

template <class T>
T positive(const json& j, const char* key) {
    const T v = whole<T>(j, key);
    if (!(v > T{})) throw ConfigError(std::string(key) + " must be positive");
    return v;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kConfigKeys.contains(key)) throw ConfigError("unknown config key: " + key);
    ExperimentConfig c;
    try {
        if (!j.contains("experiment")) throw ConfigError("config needs an experiment");
        c.experiment = parse_experiment(j.at("experiment").get<std::string>());
        if (j.contains("companions"))
            for (const auto& e : j.at("companions")) c.companions.push_back(parse_experiment(e.get<std::string>()));
        if (j.contains("d")) c.d = positive<int>(j, "d");
        if (j.contains("rho")) {
            const auto& r = j.at("rho");
            c.rhos.clear();
            if (r.is_array())
                for (const auto& x : r) c.rhos.push_back(x.get<double>());
            else
                c.rhos.push_back(r.get<double>());
        }
        if (j.contains("replications")) c.replications = positive<std::size_t>(j, "replications");
        if (j.contains("master_seed")) c.master_seed = whole<std::uint64_t>(j, "master_seed");
        if (j.contains("intensity")) c.intensity = positive<double>(j, "intensity");
        if (j.contains("gauss_poisson")) {
            const auto& g = j.at("gauss_poisson");
            GaussPoissonParams p;
            p.gamma_a = g.at("gamma_a").get<double>();
            p.p0 = g.value("p0", 0.0);
            p.p1 = g.at("p1").get<double>();
            p.p2 = g.at("p2").get<double>();
            c.gp = p;
        }
        if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
        if (j.contains("tau")) c.tau = positive<double>(j, "tau");
        if (j.contains("order_max")) c.order_max = positive<int>(j, "order_max");
        if (j.contains("mc")) {
            const auto& m = j.at("mc");
            for (const auto& [key, _] : m.items())
                if (key != "flower_samples" && key != "alpha4_samples" && key != "alpha5_cells")
                    throw ConfigError("unknown mc key: " + key);
            if (m.contains("flower_samples")) c.flower_samples = whole<std::size_t>(m, "flower_samples");
            if (m.contains("alpha4_samples")) c.alpha4_samples = positive<std::size_t>(m, "alpha4_samples");
            if (m.contains("alpha5_cells")) c.alpha5_cells = positive<std::size_t>(m, "alpha5_cells");
        }
        if (j.contains("margin")) c.margin = positive<double>(j, "margin");
        if (j.contains("method")) {
            const auto m = j.at("method").get<std::string>();
            if (m == "full") c.method = Method::Full;
            else if (m == "local") c.method = Method::Local;
            else throw ConfigError("method must be \"full\" or \"local\"");
        }
        if (j.contains("local_tau_max")) c.local_tau_max = positive<double>(j, "local_tau_max");
        if (j.contains("tail_keep")) c.tail_keep = positive<std::size_t>(j, "tail_keep");
        if (j.contains("dependency_range")) c.dependency_range = positive<double>(j, "dependency_range");
        if (j.contains("g2_patches")) c.g2_patches = positive<std::size_t>(j, "g2_patches");
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("threads")) c.threads = whole<unsigned>(j, "threads");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = experiment_name(c.experiment);
    if (!c.companions.empty()) {
        json a = json::array();
        for (Experiment e : c.companions) a.push_back(experiment_name(e));
        j["companions"] = a;
    }
    j["d"] = c.d;
    if (c.rhos.size() == 1) j["rho"] = c.rhos.front();
    else j["rho"] = c.rhos;
    j["replications"] = c.replications;
    j["master_seed"] = c.master_seed;
    if (c.intensity) j["intensity"] = *c.intensity;
    if (c.gp) j["gauss_poisson"] = {{"gamma_a", c.gp->gamma_a}, {"p0", c.gp->p0}, {"p1", c.gp->p1}, {"p2", c.gp->p2}};
    if (!c.t_grid.empty()) j["t_grid"] = c.t_grid;
    j["tau"] = c.tau;
    j["order_max"] = c.order_max;
    j["mc"] = {{"flower_samples", c.flower_samples}, {"alpha4_samples", c.alpha4_samples},
               {"alpha5_cells", c.alpha5_cells}};
    if (c.margin) j["margin"] = *c.margin;
    j["method"] = c.method == Method::Local ? "local" : "full";
    j["local_tau_max"] = c.local_tau_max;
    j["tail_keep"] = c.tail_keep;
    if (c.dependency_range) j["dependency_range"] = *c.dependency_range;
    j["g2_patches"] = c.g2_patches;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return config_from_json(j);
}

json replication_to_json(const ReplicationResult& r) {
    json j;
    j["seed"] = r.seed;
    j["orientation"] = r.orientation == Orientation::Max ? "max" : "min";
    j["d"] = r.d;
    j["rho"] = r.rho;
    j["window_side"] = r.window_side;
    j["cell_count"] = r.cell_count;
    j["excluded"] = r.excluded;
    j["complete"] = r.complete;
    json os = json::array();
    for (double v : r.order_stats) os.push_back(num(r.raw(v)));
    j["order_stats"] = os;
    // Sub-cube maxima at or below the tail floor never change a count, so only the rest is kept.
    json sc = json::array();
    for (std::size_t i = 0; i < r.subcube_max.size(); ++i)
        if (r.subcube_max[i] > r.tail_floor || (r.tail_floor == kNegInf && r.subcube_max[i] > kNegInf))
            sc.push_back(json::array({i, num(r.raw(r.subcube_max[i]))}));
    j["subcube_count"] = r.subcube_max.size();
    j["nonempty_subcubes"] = r.nonempty_subcubes;
    j["subcube_extremes"] = sc;
    json tail = json::array();
    for (const auto& c : r.tail) {
        json p = json::array();
        for (int k = 0; k < r.d; ++k) p.push_back(c.nucleus[k]);
        tail.push_back(json::array({p, num(r.raw(c.value))}));
    }
    j["tail"] = tail;
    j["tail_floor"] = num(r.raw(r.tail_floor));
    return j;
}

ReplicationResult replication_from_json(const json& j) {
    ReplicationResult r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.orientation = j.at("orientation").get<std::string>() == "max" ? Orientation::Max : Orientation::Min;
    r.d = j.at("d").get<int>();
    r.rho = j.at("rho").get<double>();
    r.window_side = j.at("window_side").get<double>();
    r.cell_count = j.at("cell_count").get<std::size_t>();
    r.excluded = j.at("excluded").get<std::size_t>();
    r.complete = j.at("complete").get<bool>();
    for (const auto& v : j.at("order_stats")) r.order_stats.push_back(r.oriented(as_num(v)));
    r.subcube_max.assign(j.at("subcube_count").get<std::size_t>(), kNegInf);
    r.nonempty_subcubes = j.at("nonempty_subcubes").get<std::size_t>();
    for (const auto& e : j.at("subcube_extremes")) r.subcube_max.at(e.at(0).get<std::size_t>()) = r.oriented(as_num(e.at(1)));
    for (const auto& c : j.at("tail")) {
        TailCell t;
        const auto& p = c.at(0);
        for (std::size_t k = 0; k < p.size() && k < 3; ++k) t.nucleus[k] = p[k].get<double>();
        t.value = r.oriented(as_num(c.at(1)));
        r.tail.push_back(t);
    }
    r.tail_floor = r.oriented(as_num(j.at("tail_floor")));
    return r;
}

namespace {

json gap_to_json(const GapRow& g) {
    return {{"r", g.r},          {"t", g.t},         {"tau", g.gap.tau}, {"gap", g.gap.gap},
            {"p_hat", g.gap.p_hat}, {"target", g.gap.target}, {"se", g.gap.se}};
}

}  // namespace

json summary_to_json(const Summary& s) {
    json j;
    j["experiment"] = experiment_name(s.experiment);
    j["d"] = s.d;
    j["rho"] = s.rho;
    j["replications"] = s.replications;
    j["master_seed"] = s.master_seed;
    j["mean_cells"] = s.mean_cells;
    if (s.ks) j["ks"] = *s.ks;
    if (s.ks_low) j["ks_constant_band"] = {*s.ks_low, *s.ks_high};
    json gaps = json::array();
    for (const auto& g : s.gaps) gaps.push_back(gap_to_json(g));
    j["chen_stein_gaps"] = gaps;
    if (s.theta)
        j["extremal_index"] = {{"theta", s.theta->theta}, {"lower", s.theta->lower}, {"upper", s.theta->upper},
                               {"se", s.theta->se},       {"p_hat", s.theta->p_hat}, {"tau", s.theta->tau},
                               {"threshold", s.theta->threshold}, {"theta_blocks", s.theta->theta_blocks}};
    if (s.g2) j["g2"] = {{"value", s.g2->value}, {"se", s.g2->se}, {"pairs", s.g2->pairs}};
    j["mean_u"] = s.mean_u;
    j["mean_u_prime"] = s.mean_u_prime;
    return j;
}

json mc_value_to_json(const McValue& v) {
    return {{"value", v.value}, {"se", v.se}, {"mc_samples", v.samples}, {"seed", v.seed}};
}

McValue mc_value_from_json(const json& j) {
    return {j.at("value").get<double>(), j.at("se").get<double>(), j.at("mc_samples").get<std::size_t>(),
            j.at("seed").get<std::uint64_t>()};
}

json results_to_json(const ResultsDocument& doc, const std::string& timestamp) {
    json j;
    j["software_version"] = kSoftwareVersion;
    j["timestamp"] = timestamp;
    j["experiment"] = experiment_name(doc.experiment);
    j["d"] = doc.config.d;
    j["rho"] = doc.rho;
    j["replications"] = doc.replications.size();
    j["master_seed"] = doc.config.master_seed;
    j["config"] = config_to_json(doc.config);
    json k = json::object();
    if (doc.constants.alpha4) k["alpha4"] = mc_value_to_json(*doc.constants.alpha4);
    if (doc.constants.alpha5) k["alpha5"] = mc_value_to_json(*doc.constants.alpha5);
    j["constants"] = k;
    json reps = json::array();
    for (const auto& r : doc.replications) reps.push_back(replication_to_json(r));
    j["per_replication"] = reps;
    j["summary"] = summary_to_json(doc.summary);
    return j;
}

ResultsDocument results_from_json(const json& j) {
    ResultsDocument doc;
    doc.config = config_from_json(j.at("config"));
    doc.experiment = parse_experiment(j.at("experiment").get<std::string>());
    doc.rho = j.at("rho").get<double>();
    const auto& k = j.at("constants");
    if (k.contains("alpha4")) doc.constants.alpha4 = mc_value_from_json(k.at("alpha4"));
    if (k.contains("alpha5")) doc.constants.alpha5 = mc_value_from_json(k.at("alpha5"));
    for (const auto& r : j.at("per_replication")) doc.replications.push_back(replication_from_json(r));
    doc.summary = summarize(doc.config, doc.experiment, doc.rho, doc.replications, doc.constants);
    return doc;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string replications_csv(std::span<const ReplicationResult> results, const ThresholdFamily& f) {
    std::ostringstream o;
    o << "replicate,seed,cell_count,excluded,order,score,normalized\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        for (std::size_t k = 0; k < r.order_stats.size(); ++k) {
            const double raw = r.raw(r.order_stats[k]);
            const double t = std::isfinite(raw) ? f.normalize(raw) : raw;
            o << i << ',' << r.seed << ',' << r.cell_count << ',' << r.excluded << ',' << k + 1 << ','
              << fmt17(raw) << ',' << fmt17(t) << '\n';
        }
    }
    return o.str();
}

std::string phi_csv(std::span<const std::vector<PhiPoint>> lists) {
    std::ostringstream o;
    o << "replicate,x,y,score\n";
    for (std::size_t i = 0; i < lists.size(); ++i)
        for (const auto& p : lists[i])
            o << i << ',' << fmt17(p.position[0]) << ',' << fmt17(p.position[1]) << ',' << fmt17(p.t) << '\n';
    return o.str();
}

std::string triangulation_csv(const Triangulation& t) {
    std::ostringstream o;
    o << "triangle,v0,v1,v2,cx,cy,R,area\n";
    for (std::size_t i = 0; i < t.triangles.size(); ++i) {
        const auto& T = t.triangles[i];
        const Circle c = t.circumcircle_of(static_cast<int>(i));
        o << i << ',' << T.v[0] << ',' << T.v[1] << ',' << T.v[2] << ',' << fmt17(c.center.x) << ','
          << fmt17(c.center.y) << ',' << fmt17(c.radius) << ',' << fmt17(t.area_of(static_cast<int>(i))) << '\n';
    }
    return o.str();
}

std::string voronoi_csv(std::span<const VoronoiCellRecord> cells) {
    std::ostringstream o;
    o << "x,y,r,D,flower,N,bounded\n";
    for (const auto& c : cells)
        o << fmt17(c.nucleus.x) << ',' << fmt17(c.nucleus.y) << ',' << fmt17(c.inradius) << ','
          << fmt17(c.farthest) << ',' << fmt17(c.flower) << ',' << c.neighbors << ',' << (c.bounded ? 1 : 0)
          << '\n';
    return o.str();
}

std::string laws_csv(int d) {
    std::ostringstream o;
    o << "v,circumradius_cdf,inradius_survival";
    if (d == 2) o << ",area_survival";
    o << '\n';
    for (int i = 0; i <= 40; ++i) {
        const double v = 0.05 * i;
        o << fmt17(v) << ',' << fmt17(delaunay_circumradius_cdf(v, d)) << ',' << fmt17(voronoi_inradius_survival(v, d));
        if (d == 2) o << ',' << fmt17(delaunay_area_survival_2d(v));
        o << '\n';
    }
    return o.str();
}

ConstantsCache::ConstantsCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    try {
        data_ = json::parse(in);
        if (!data_.is_object()) data_ = json::object();
    } catch (const json::exception&) {
        data_ = json::object();
    }
}

std::filesystem::path ConstantsCache::default_path(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("TESS_EXTREMES_CACHE"); env && *env) return env;
    return fallback;
}

namespace {

std::string cache_key(const std::string& name, std::size_t budget, std::uint64_t seed) {
    return name + ":" + std::to_string(budget) + ":" + std::to_string(seed);
}

}  // namespace

std::optional<McValue> ConstantsCache::get(const std::string& name, std::size_t budget, std::uint64_t seed) const {
    const auto key = cache_key(name, budget, seed);
    if (!data_.contains(key)) return std::nullopt;
    try {
        return mc_value_from_json(data_.at(key));
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

void ConstantsCache::put(const std::string& name, std::size_t budget, const McValue& v) {
    data_[cache_key(name, budget, v.seed)] = mc_value_to_json(v);
}

void ConstantsCache::save() const { write_atomic(path_, data_.dump(2) + "\n"); }

McConstants constants_with_cache(const ExperimentConfig& cfg, ConstantsCache& cache) {
    McConstants k;
    std::vector<Experiment> all{cfg.experiment};
    all.insert(all.end(), cfg.companions.begin(), cfg.companions.end());
    bool dirty = false;
    for (Experiment e : all) {
        if (e == Experiment::VoronoiMinFarthest && !k.alpha4) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, 0xa4);
            k.alpha4 = cache.get("alpha4_d2", cfg.alpha4_samples, seed);
            if (!k.alpha4) {
                k.alpha4 = alpha_d4_estimate(2, cfg.alpha4_samples, seed);
                cache.put("alpha4_d2", cfg.alpha4_samples, *k.alpha4);
                dirty = true;
            }
        }
        if (e == Experiment::VoronoiMinFlower && !k.alpha5) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, 0xa5);
            k.alpha5 = cache.get("alpha5_d2", cfg.alpha5_cells, seed);
            if (!k.alpha5) {
                k.alpha5 = estimate_alpha5(cfg.alpha5_cells, seed, cfg.threads);
                cache.put("alpha5_d2", cfg.alpha5_cells, *k.alpha5);
                dirty = true;
            }
        }
    }
    if (dirty) cache.save();
    return k;
}

}  // namespace tess
