#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "acr/model/network.hpp"

namespace acr {

struct EquilibriumOptions {
    int max_newton_iterations = 100;
    /// Perturbed restarts after convergence to the boundary.
    int max_retries = 5;
    double boundary = 1e-12;
    /// Acceptance: max|rhs| < residual_tol * (1 + max_r lambda_r).
    double residual_tol = 1e-10;
    /// Class preservation: |T.(z - anchor)| < class_tol * (1 + |T|.anchor).
    double class_tol = 1e-10;
    /// Longest horizon tried by the ODE fallback.
    double ode_horizon = 1e6;
    std::uint64_t seed = 0x5eed;
};

struct EquilibriumPoint {
    std::vector<double> concentrations;
    std::vector<double> anchor;
    double residual_norm = 0.0;
    /// "newton" or "ode+newton".
    std::string method;
};

/// Equilibrium search with the structural preprocessing (stoichiometric
/// basis, conservation laws) done once, for repeated solves with varying
/// rate constants. Keeps a copy of the network.
class EquilibriumSolver {
public:
    explicit EquilibriumSolver(const ReactionNetwork& net);
    std::optional<EquilibriumPoint> solve(std::span<const double> anchor,
                                          const EquilibriumOptions& options = {}) const;
    /// Same topology, rate constants `kappa` in reaction order.
    std::optional<EquilibriumPoint> solve(std::span<const double> kappa,
                                          std::span<const double> anchor,
                                          const EquilibriumOptions& options = {}) const;
    const ReactionNetwork& network() const { return net_; }

private:
    ReactionNetwork net_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd conservation_;
    std::vector<double> kappa_;
};

/// Positive equilibrium of the deterministic mass-action system in the
/// stoichiometric compatibility class of `anchor`, or nullopt.
std::optional<EquilibriumPoint> find_positive_equilibrium(const ReactionNetwork& net,
                                                          std::span<const double> anchor,
                                                          const EquilibriumOptions& options = {});

/// max_i |sum_r xi_ri lambda_r(z)|.
double rhs_residual(const ReactionNetwork& net, std::span<const double> z);

struct AcrOptions {
    std::size_t num_classes = 10;
    double anchor_low = 1e-2;
    double anchor_high = 1e2;
    double rel_tol = 1e-6;
    std::uint64_t seed = 1;
    EquilibriumOptions equilibrium;
};

struct AcrReport {
    std::vector<std::size_t> acr_species;
    std::map<std::size_t, double> acr_values;
    bool non_degenerate = false;
    std::size_t equilibria_sampled = 0;
    std::size_t anchors_tried = 0;
    std::vector<EquilibriumPoint> equilibria;
    std::vector<std::string> warnings;
};

/// Sampling-based ACR detection; the result is numerical evidence only.
AcrReport detect_acr(const ReactionNetwork& net, const AcrOptions& options = {});

nlohmann::ordered_json to_json(const AcrReport& report, const ReactionNetwork& net);

}  // namespace acr
