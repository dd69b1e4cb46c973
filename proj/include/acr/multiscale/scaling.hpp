#pragma once

// Two-scale family X^N: discrete species (alpha = 0) stay O(1), continuous
// species (alpha = 1) are O(N). Rates of the N-th member and their limits.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "acr/model/network.hpp"

namespace acr {

struct ScalingSpec {
    /// Per species: 0 discrete, 1 continuous.
    std::vector<int> alpha;
    /// Limit of N^{-alpha} X^N(0); strictly positive.
    std::vector<double> x0;
    std::vector<long long> n_grid;
};

/// Throws ConfigError when the scaling does not fit the network.
void validate_scaling(const ReactionNetwork& net, const ScalingSpec& spec);

/// beta_r = max alpha over the species of the source complex (0 for the
/// empty source).
std::vector<int> reaction_betas(const ReactionNetwork& net, std::span<const int> alpha);

std::vector<std::size_t> discrete_species(std::span<const int> alpha);
std::vector<std::size_t> continuous_species(std::span<const int> alpha);

/// ||pi_c(y)||_1.
Count continuous_order(const Complex& y, std::span<const int> alpha);

/// Exponent e with kappa^N = N^e kappa for a mass-action reaction.
int mass_action_exponent(const Reaction& r, std::span<const int> alpha);

struct ScaledSystem {
    long long N = 1;
    /// Rate laws of the N-th member of the family.
    ReactionNetwork network;
    /// round(x0) on discrete coordinates, floor(N x0) on continuous ones.
    std::vector<Count> initial_state;
};

/// Mass-action constants become N^{beta - ||pi_c(y)||} kappa; expression
/// laws become N^p * body with p the declared scale (0 when undeclared; see
/// check_expression_scaling).
ScaledSystem build_scaled_system(const ReactionNetwork& base, const ScalingSpec& spec, long long N);

/// Limiting intensities lambda_r(v, w) of the family. The argument is a full
/// species vector holding counts on discrete and concentrations on
/// continuous coordinates.
class LimitKinetics {
public:
    LimitKinetics(ReactionNetwork base, std::vector<int> alpha);

    double rate(std::size_t r, std::span<const double> x) const;
    /// N^{-beta_r} lambda_r^N(v, floor(N w)).
    double scaled_rate(std::size_t r, std::span<const double> x, double N) const;

    const ReactionNetwork& network() const { return net_; }
    const std::vector<int>& alpha() const { return alpha_; }
    const std::vector<int>& betas() const { return betas_; }

private:
    ReactionNetwork net_;
    std::vector<int> alpha_;
    std::vector<int> betas_;
};

/// Probe grid used by the scaling checks: v in {0..5} on discrete
/// coordinates and w in {0.5, 1, 2} on continuous ones, as full vectors.
std::vector<std::vector<double>> probe_grid(std::span<const int> alpha, int v_max = 5,
                                            std::size_t max_points = 20000);

/// max over the probe grid and all reactions of
/// |N^{-beta_r} lambda_r^N(v, floor(Nw)) - lambda_r(v, w)|.
double scaling_limit_error(const LimitKinetics& kinetics, double N);

/// Validates the declared N-dependence of every expression law on the probe
/// grid. Throws ConfigError naming the reaction when the declaration is
/// missing and cannot be inferred, or disagrees with the declared limit.
void check_expression_scaling(const LimitKinetics& kinetics);

}  // namespace acr
