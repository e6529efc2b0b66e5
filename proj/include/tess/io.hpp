#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "tess/delaunay.hpp"
#include "tess/experiment.hpp"
#include "tess/report.hpp"
#include "tess/voronoi.hpp"

namespace tess {

inline constexpr const char* kSoftwareVersion = "0.1.0";

// 17 significant digits; "inf"/"-inf"/"nan" for non-finite values.
std::string fmt17(double x);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
// Throws ConfigError on unreadable or malformed files.
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json replication_to_json(const ReplicationResult& r);
ReplicationResult replication_from_json(const nlohmann::json& j);
nlohmann::json summary_to_json(const Summary& s);
nlohmann::json mc_value_to_json(const McValue& v);
McValue mc_value_from_json(const nlohmann::json& j);

struct ResultsDocument {
    ExperimentConfig config;
    Experiment experiment{};
    double rho = 0.0;
    McConstants constants;
    std::vector<ReplicationResult> replications;
    Summary summary;
};

// Deterministic document; `timestamp` is the only field that varies between reruns.
nlohmann::json results_to_json(const ResultsDocument& doc, const std::string& timestamp);
ResultsDocument results_from_json(const nlohmann::json& j);

// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string replications_csv(std::span<const ReplicationResult> results, const ThresholdFamily& f);
std::string phi_csv(std::span<const std::vector<PhiPoint>> lists);
std::string triangulation_csv(const Triangulation& t);
std::string voronoi_csv(std::span<const VoronoiCellRecord> cells);
std::string laws_csv(int d);

// Cache of Monte Carlo constants keyed by (name, requested budget, seed). The
// path comes from TESS_EXTREMES_CACHE, else `fallback`.
class ConstantsCache {
public:
    explicit ConstantsCache(std::filesystem::path path);
    static std::filesystem::path default_path(const std::filesystem::path& fallback);

    std::optional<McValue> get(const std::string& name, std::size_t budget, std::uint64_t seed) const;
    void put(const std::string& name, std::size_t budget, const McValue& v);
    void save() const;

private:
    std::filesystem::path path_;
    nlohmann::json data_ = nlohmann::json::object();
};

// Fills cfg's constants, reading and updating the cache.
McConstants constants_with_cache(const ExperimentConfig& cfg, ConstantsCache& cache);

}  // namespace tess
