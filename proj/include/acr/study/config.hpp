#pragma once

// Ensemble study configuration. JSON with a versioned `schema` field;
// unknown keys are rejected so that a config fully determines its outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "acr/model/network.hpp"
#include "acr/multiscale/reduction.hpp"
#include "acr/multiscale/scaling.hpp"

namespace acr {

inline constexpr const char* kStudySchema = "acr-scope/study/1";

/// Named function g of one discrete species: `mean` (g = x), `indicator`
/// (g = 1 on `set`) or `truncated_second_moment` (g = min(x, cap)^2).
struct ObservableSpec {
    std::string species;
    std::string g;
    std::vector<Count> set;
    Count cap = 0;

    std::string label() const;
    bool bounded() const { return g != "mean"; }
    double operator()(Count x) const;
};

struct StudyThresholds {
    /// Median sup path distance at the largest N.
    std::optional<double> path_sup_max;
    bool path_decreasing = false;
    /// TV to the reference law at t = T and the largest N.
    std::optional<double> tv_max;
    bool tv_decreasing = false;
    /// Relative error of the empirical mean at t = T and the largest N.
    std::optional<double> mean_rel_error_max;
    /// Median running-integral residual (first observable) at the largest N.
    std::optional<double> residual_max;
    bool residual_decreasing = false;
    /// Lower bound on the TV to the best-fit Poisson law (non-Poisson studies).
    std::optional<double> tv_best_poisson_min;
};

/// Cross-check of an equilibrium value against closed-form expressions in
/// the rate constants of a mass-action network.
struct ValueCheck {
    std::string network_file;
    std::string species;
    /// Expression used for the study.
    std::string formula;
    /// Competing expression that is evaluated and reported alongside.
    std::string alternative;
    /// Constant overrides for a second evaluation that separates the two.
    std::map<std::string, double> probe_constants;
};

struct StudyConfig {
    std::string name;
    std::string description;
    std::filesystem::path base_dir;
    std::string network_file;
    std::map<std::string, int> alpha_by_name;
    std::map<std::string, double> x0_by_name;
    std::vector<long long> n_grid;
    double T = 0.0;
    double delta = 0.0;
    std::size_t replicas = 0;
    std::size_t path_replicas = 0;
    std::uint64_t seed = 0;
    DiscreteAveraging mode = DiscreteAveraging::ProductForm;
    std::vector<ObservableSpec> observables;
    std::vector<std::string> marginal_species;
    /// "poisson" or "non_poisson".
    std::string expectation = "poisson";
    StudyThresholds thresholds;
    std::optional<ValueCheck> value_check;
    std::vector<std::string> notes;
    double time_budget_minutes = 0.0;

    std::filesystem::path resolve(const std::string& relative) const;
    /// Network and scaling resolved against the network's species order.
    ReactionNetwork load_network() const;
    ScalingSpec scaling(const ReactionNetwork& net) const;
};

/// Throws ConfigError with the offending key.
StudyConfig parse_study_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
StudyConfig load_study_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const StudyConfig& config);

/// Value of a constant expression over the `let` constants of a network
/// file, optionally with some constants overridden.
double evaluate_constant_formula(const std::filesystem::path& network_file,
                                 const std::string& formula,
                                 const std::map<std::string, double>& overrides = {});

/// Network file text with `let` values replaced.
std::string override_constants(const std::string& text, const std::map<std::string, double>& overrides);

}  // namespace acr
