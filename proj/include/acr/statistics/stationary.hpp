#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "acr/model/network.hpp"

namespace acr {

struct StationaryOptions {
    Count initial_cap = 32;
    /// Per-coordinate cap limit for the doubling loop.
    Count max_cap = 8192;
    std::size_t max_states = 400'000;
    double leakage_tol = 1e-8;
};

/// Stationary law of a stochastic chain restricted to the states reachable
/// from `start` inside the box [0, cap]^n. Transitions leaving the box are
/// suppressed (reflecting truncation).
struct TruncatedStationary {
    Count cap = 0;
    std::vector<std::vector<Count>> states;
    std::vector<double> probabilities;
    /// Stationary mass on states with a suppressed transition.
    double leakage = 0.0;
    /// ||mu Q||_1 restricted to interior states.
    double generator_residual = 0.0;

    double expectation(const std::function<double(std::span<const Count>)>& g) const;
    /// E[v!/(v - y)!].
    double falling_factorial_moment(std::span<const Count> y) const;
    double mean(std::size_t species) const;
    double variance(std::size_t species) const;
    double fano(std::size_t species) const { return variance(species) / mean(species); }
    /// pmf of one coordinate over 0..cap.
    std::vector<double> marginal(std::size_t species) const;
};

/// Doubles the cap until the leakage is below tolerance. Rates come from
/// evaluate_rate on `chain`. Throws EvaluationError when the cap limit is
/// reached first.
TruncatedStationary truncated_stationary(const ReactionNetwork& chain,
                                         std::vector<Count> start = {},
                                         const StationaryOptions& options = {});

}  // namespace acr
