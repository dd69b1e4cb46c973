#pragma once

// Reduced systems of the two-scale limit: the fast discrete chain S_d^w with
// the continuous species frozen at concentration w, and the averaged
// deterministic system S_c over the continuous species.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "acr/dynamics/ode.hpp"
#include "acr/multiscale/scaling.hpp"

namespace acr {

class EquilibriumSolver;

/// Reaction of a reduced network. Complexes are dense over the reduced
/// species; `preimage` lists the base reactions that project onto it.
struct ReducedReaction {
    std::vector<Count> source;
    std::vector<Count> product;
    std::vector<std::size_t> preimage;
    std::size_t source_complex = 0;
    std::size_t product_complex = 0;
};

/// Complex-balanced equilibrium q_d^w of the discrete reduction at one w.
struct DiscreteEquilibrium {
    bool found = false;
    bool balanced = false;
    std::vector<double> q;
    /// Largest per-complex |out - in| / max(out, in) at q.
    double residual = 0.0;
    std::size_t witness_complex = 0;
    /// "closed-form", "root" or "newton".
    std::string method;
    std::string diagnostic;
};

class DiscreteReduction {
public:
    /// Builds G_d from the reactions whose source holds a continuous species
    /// and checks that every such rate factors as kappa_r(w) v!/(v - y)!.
    /// Throws AssumptionViolation naming the reaction otherwise.
    explicit DiscreteReduction(LimitKinetics kinetics);

    const LimitKinetics& kinetics() const { return kinetics_; }
    const ReactionNetwork& base() const { return kinetics_.network(); }
    /// X_d and X_c as base species indices.
    const std::vector<std::size_t>& species() const { return discrete_; }
    const std::vector<std::size_t>& continuous() const { return continuous_; }
    /// Base reactions with pi_c(y) != 0.
    const std::vector<std::size_t>& fast_reactions() const { return fast_; }
    const std::vector<ReducedReaction>& reactions() const { return reactions_; }
    const std::vector<std::vector<Count>>& complexes() const { return complexes_; }
    std::vector<std::string> species_names() const;

    /// Full species vector from discrete counts v and concentrations w.
    std::vector<double> full_state(std::span<const double> v, std::span<const double> w) const;

    /// kappa_r(w) for a fast base reaction.
    double kappa(std::size_t base_reaction, std::span<const double> w) const;
    /// Summed constants of the reduced reactions at w.
    std::vector<double> reduced_kappas(std::span<const double> w) const;
    /// lambda^w_{d,k}(v): the sum of the limiting rates of the preimage.
    double rate(std::size_t k, std::span<const double> v, std::span<const double> w) const;

    DiscreteEquilibrium equilibrium(std::span<const double> w) const;
    /// Per-complex balance residuals of G_d at (q, w).
    std::vector<double> balance_residuals(std::span<const double> q,
                                          std::span<const double> w) const;

    /// G_d at fixed w as a mass-action network over X_d.
    ReactionNetwork network_at(std::span<const double> w) const;

private:
    LimitKinetics kinetics_;
    std::vector<std::size_t> discrete_;
    std::vector<std::size_t> continuous_;
    std::vector<std::size_t> fast_;
    std::vector<ReducedReaction> reactions_;
    std::vector<std::vector<Count>> complexes_;
    bool birth_death_only_ = false;
    std::shared_ptr<const EquilibriumSolver> solver_;
};

enum class DiscreteAveraging {
    /// lambda_r evaluated at the product-form mean q_d^w.
    ProductForm,
    /// E over the stationary law of the truncated discrete chain; for discrete
    /// systems that are not complex balanced.
    Stationary,
};

class ContinuousReduction {
public:
    /// In ProductForm mode q_d^w must exist and be complex balanced at every
    /// probe w, else AssumptionViolation. Stationary mode needs |X_d| <= 2.
    explicit ContinuousReduction(DiscreteReduction discrete,
                                 DiscreteAveraging mode = DiscreteAveraging::ProductForm);

    const DiscreteReduction& discrete() const { return discrete_; }
    DiscreteAveraging mode() const { return mode_; }
    const std::vector<ReducedReaction>& reactions() const { return reactions_; }
    const std::vector<std::vector<Count>>& complexes() const { return complexes_; }
    std::vector<std::string> species_names() const;

    /// Discrete averages entering each fast base reaction at w: q^{pi_d(y)}
    /// or E_mu[v!/(v - pi_d(y))!], indexed like discrete().fast_reactions().
    std::vector<double> discrete_factors(std::span<const double> w) const;
    /// lambda_{c,k}(w); zero unless w > 0.
    std::vector<double> rates(std::span<const double> w) const;
    OdeRhs rhs() const;
    /// pi_c(X0).
    std::vector<double> initial_state(std::span<const double> x0) const;

private:
    DiscreteReduction discrete_;
    DiscreteAveraging mode_;
    std::vector<ReducedReaction> reactions_;
    std::vector<std::vector<Count>> complexes_;
};

/// Concentration grid {0.5, 1, 2}^|X_c|, thinned to at most `max_points`.
std::vector<std::vector<double>> continuous_probe_grid(std::size_t dimension,
                                                       std::size_t max_points = 243);

}  // namespace acr
