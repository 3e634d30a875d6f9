#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loosepack/engine.hpp"
#include "loosepack/params.hpp"

namespace loosepack {

struct ExperimentConfig {
    std::uint64_t n = 0;
    unsigned k = 3;
    double p = 0.0;
    double epsilon = 0.1;
    std::vector<std::uint64_t> seeds{1};
    std::optional<std::uint64_t> trials;  // with one seed s: runs s, s+1, ..., s+trials-1
    Overrides overrides;
    bool desk_scale = false;
    std::uint64_t solver_cap = 10'000'000;
    CouplingMode mode = CouplingMode::Lazy;
    std::size_t mass_sample = 256;
    std::filesystem::path out;  // empty: no files
    bool log_queries = false;
    std::string format = "json";  // json | csv | both
    unsigned threads = 1;
    bool timing = false;  // wall_ms stays 0 unless set, keeping summaries byte-stable
    int verbosity = 0;

    /// Seeds actually run, in order.
    std::vector<std::uint64_t> effective_seeds() const;
    /// Throws ParamError with the offending field.
    void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct SeedRow {
    std::uint64_t seed = 0;
    std::uint64_t n = 0;
    unsigned k = 0;
    double p = 0.0;
    std::uint64_t N = 0;
    std::uint64_t cycles_found = 0;
    std::uint64_t fail_step1 = 0;
    std::uint64_t fail_mid = 0;
    std::uint64_t fail_close = 0;
    std::uint64_t collisions = 0;  // colliding (tuple, cycle pair) incidences
    double max_Qe = 0.0;
    double wall_ms = 0.0;
    std::map<std::string, std::uint64_t> failures;  // "step:cause" -> rounds
    std::uint64_t invalid_cycles = 0;
    std::uint64_t qe_violations = 0;
    bool embedding_ok = true;
    std::uint64_t accounting_violations = 0;
    double collision_estimate = 0.0;

    friend bool operator==(const SeedRow&, const SeedRow&) = default;
};

struct Aggregate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct ExperimentSummary {
    nlohmann::json config;
    nlohmann::json params;  // null when no seed ran
    nlohmann::json audit;
    std::vector<SeedRow> rows;  // ascending seed order
    bool interrupted = false;

    std::map<std::string, Aggregate> aggregates() const;
};

/// Runs every seed on a worker pool. Rows are keyed by seed, so the summary
/// does not depend on scheduling. `stop` is polled between seeds; completed
/// rows are kept and `interrupted` is set.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::atomic<bool>* stop = nullptr);

nlohmann::json to_json(const SeedRow& r);
SeedRow seed_row_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSummary& s);

inline constexpr const char* kCsvHeader =
    "seed,n,k,p,N,cycles_found,fail_step1,fail_mid,fail_close,collisions,max_Qe,wall_ms";
std::string to_csv(const ExperimentSummary& s);

/// Writes summary.json and/or summary.csv into `dir`; returns the paths.
std::vector<std::filesystem::path> emit(const ExperimentSummary& s, const std::string& format,
                                        const std::filesystem::path& dir);

}  // namespace loosepack
