#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "acr/model/expression.hpp"

namespace acr {

using Count = long long;

struct Species {
    std::string name;
    std::size_t index = 0;

    bool operator==(const Species&) const = default;
};

/// Non-negative integer combination of species, stored sparsely with only
/// strictly positive coefficients, sorted by species index.
class Complex {
public:
    using Term = std::pair<std::size_t, Count>;

    Complex() = default;
    explicit Complex(std::vector<Term> terms);
    static Complex from_dense(std::span<const Count> coefficients);

    const std::vector<Term>& terms() const { return terms_; }
    Count coefficient(std::size_t species) const;
    std::vector<Count> dense(std::size_t num_species) const;
    /// Sum of coefficients (molecularity).
    Count order() const;
    bool empty() const { return terms_.empty(); }

    bool operator==(const Complex&) const = default;
    auto operator<=>(const Complex&) const = default;

private:
    std::vector<Term> terms_;
};

struct MassActionLaw {
    double kappa = 0.0;
    /// Constant expression the rate constant was written as (`k1`, `2.5`, `k2 * D`).
    ExprPtr constant;
};

/// Rational-function rate over species counts. `scale_power` is the declared
/// N-dependence (rate^N = N^p * body) and `limit` the declared limiting law
/// in (discrete counts, continuous concentrations).
struct ExpressionLaw {
    ExprPtr body;
    std::optional<int> scale_power;
    ExprPtr limit;
};

class RateLaw {
public:
    RateLaw() = default;
    RateLaw(MassActionLaw law) : law_(std::move(law)) {}
    RateLaw(ExpressionLaw law) : law_(std::move(law)) {}

    static RateLaw mass_action(double kappa);

    bool is_mass_action() const { return std::holds_alternative<MassActionLaw>(law_); }
    const MassActionLaw& as_mass_action() const { return std::get<MassActionLaw>(law_); }
    const ExpressionLaw& as_expression() const { return std::get<ExpressionLaw>(law_); }
    /// Rate constant of a mass-action law.
    double kappa() const { return as_mass_action().kappa; }

    bool operator==(const RateLaw& other) const;

private:
    std::variant<MassActionLaw, ExpressionLaw> law_;
};

struct Reaction {
    Complex source;
    Complex product;
    std::vector<Count> reaction_vector;
    RateLaw rate_law;
    std::size_t source_complex = 0;   // index into ReactionNetwork::complexes()
    std::size_t product_complex = 0;
};

struct NamedConstant {
    std::string name;
    double value = 0.0;

    bool operator==(const NamedConstant&) const = default;
};

struct ReactionSpec {
    Complex source;
    Complex product;
    RateLaw rate_law;
};

/// Immutable reaction network: ordered species, first-appearance ordered
/// deduplicated complexes, and reactions with attached kinetics.
class ReactionNetwork {
public:
    ReactionNetwork() = default;

    /// Validates and assembles a network. Throws NetworkError when a reaction
    /// has identical source and product, there are no reactions, a mass-action
    /// constant is not positive, or (unless `allow_unused_species`) some
    /// species appears in no complex.
    static ReactionNetwork create(std::vector<std::string> species_names,
                                  std::vector<ReactionSpec> reactions,
                                  std::vector<NamedConstant> constants = {},
                                  bool allow_unused_species = false);

    std::size_t num_species() const { return species_.size(); }
    std::size_t num_reactions() const { return reactions_.size(); }
    const std::vector<Species>& species() const { return species_; }
    const std::vector<Complex>& complexes() const { return complexes_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    const std::vector<NamedConstant>& constants() const { return constants_; }

    std::optional<std::size_t> species_index(const std::string& name) const;
    std::optional<double> constant_value(const std::string& name) const;
    bool all_mass_action() const;

    /// Same network with replacement rate laws (one per reaction).
    ReactionNetwork with_rate_laws(std::vector<RateLaw> laws) const;

    std::string complex_to_string(const Complex& c) const;

    bool operator==(const ReactionNetwork& other) const;

private:
    std::vector<Species> species_;
    std::vector<Complex> complexes_;
    std::vector<Reaction> reactions_;
    std::vector<NamedConstant> constants_;
};

/// Formats a complex as DSL text: `0`, `A + 2B`.
std::string format_complex(const Complex& c, std::span<const std::string> names);

}  // namespace acr
