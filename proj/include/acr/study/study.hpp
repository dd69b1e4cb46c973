#pragma once

// Ensemble study over the N grid: per-N replicas of the scaled process,
// compared against the reduced limit (z(t) for the continuous species,
// Poisson or stationary laws for the discrete ones).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "acr/statistics/measures.hpp"
#include "acr/study/config.hpp"

namespace acr {

struct StudyOptions {
    std::size_t threads = 0;  // 0: hardware concurrency
    std::optional<std::uint64_t> seed;
    /// Forces stationary averaging of the discrete species.
    bool remark_3_7 = false;
    /// Empty: do not write files.
    std::filesystem::path out_dir;
};

struct FixedTimeStats {
    double t = 0.0;
    /// Mean vector of the reference law over the marginal species.
    std::vector<double> reference_means;
    EmpiricalMarginal marginal;
    DistanceReport reference;
    DistanceReport best_fit;
    /// |E[g] - E_ref[g]| for the bounded observables, by label.
    std::vector<std::pair<std::string, double>> observable_errors;
};

struct NStats {
    long long N = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;  // first few messages
    std::uint64_t events = 0;
    std::size_t absorbed = 0;
    std::vector<double> path_distances;  // per path replica
    double path_median = 0.0;
    /// Per observable: per-replica residuals and their median.
    std::vector<std::vector<double>> residuals;
    std::vector<double> residual_medians;
    std::vector<FixedTimeStats> fixed;
};

struct StudyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct StudyResult {
    StudyConfig config;
    std::vector<long long> n_grid;
    std::vector<std::string> marginal_species;
    std::vector<double> sample_times;
    nlohmann::ordered_json structure;
    nlohmann::ordered_json acr;
    nlohmann::ordered_json audit;
    nlohmann::ordered_json value_check;
    std::string reduction;
    std::vector<NStats> per_n;
    std::vector<StudyCheck> checks;
    bool all_failed_at_some_n = false;

    bool verdict() const;
    /// Byte-stable record of everything the summary is rendered from.
    nlohmann::ordered_json to_json() const;
};

/// Runs the study; with an output directory also writes statistics.json,
/// summary.md, ode.csv and per-N replica and marginal CSVs. Throws
/// ConfigError / AssumptionViolation before any simulation starts.
StudyResult run_study(const StudyConfig& config, const StudyOptions& options = {});

/// Markdown summary rendered from the statistics JSON alone.
std::string render_summary(const nlohmann::ordered_json& statistics);

/// Median of a copy; NaN for an empty input.
double median(std::vector<double> values);

}  // namespace acr
