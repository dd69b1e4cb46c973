#include "acr/model/network.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "acr/util/error.hpp"

namespace acr {

Complex::Complex(std::vector<Term> terms) {
    std::map<std::size_t, Count> merged;
    for (const auto& [species, coeff] : terms) {
        if (coeff < 0) throw NetworkError("complex coefficients must be non-negative");
        merged[species] += coeff;
    }
    for (const auto& [species, coeff] : merged) {
        if (coeff > 0) terms_.emplace_back(species, coeff);
    }
}

Complex Complex::from_dense(std::span<const Count> coefficients) {
    std::vector<Term> terms;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        if (coefficients[i] != 0) terms.emplace_back(i, coefficients[i]);
    }
    return Complex(std::move(terms));
}

Count Complex::coefficient(std::size_t species) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), species,
                               [](const Term& t, std::size_t s) { return t.first < s; });
    return (it != terms_.end() && it->first == species) ? it->second : 0;
}

std::vector<Count> Complex::dense(std::size_t num_species) const {
    std::vector<Count> out(num_species, 0);
    for (const auto& [species, coeff] : terms_) out.at(species) = coeff;
    return out;
}

Count Complex::order() const {
    Count total = 0;
    for (const auto& t : terms_) total += t.second;
    return total;
}

RateLaw RateLaw::mass_action(double kappa) {
    return RateLaw(MassActionLaw{kappa, make_number(kappa)});
}

bool RateLaw::operator==(const RateLaw& other) const {
    if (is_mass_action() != other.is_mass_action()) return false;
    if (is_mass_action()) {
        const auto& a = as_mass_action();
        const auto& b = other.as_mass_action();
        if (a.kappa != b.kappa) return false;
        if (!a.constant || !b.constant) return !a.constant && !b.constant;
        return structurally_equal(*a.constant, *b.constant);
    }
    const auto& a = as_expression();
    const auto& b = other.as_expression();
    if (a.scale_power != b.scale_power) return false;
    if (!structurally_equal(*a.body, *b.body)) return false;
    if (static_cast<bool>(a.limit) != static_cast<bool>(b.limit)) return false;
    return !a.limit || structurally_equal(*a.limit, *b.limit);
}

ReactionNetwork ReactionNetwork::create(std::vector<std::string> species_names,
                                        std::vector<ReactionSpec> reactions,
                                        std::vector<NamedConstant> constants,
                                        bool allow_unused_species) {
    ReactionNetwork net;
    for (std::size_t i = 0; i < species_names.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (species_names[i] == species_names[j]) {
                throw NetworkError("duplicate species name '" + species_names[i] + "'");
            }
        }
        net.species_.push_back(Species{species_names[i], i});
    }
    if (reactions.empty()) throw NetworkError("a reaction network needs at least one reaction");

    const std::size_t n = net.species_.size();
    auto intern = [&](const Complex& c) {
        for (const auto& [species, coeff] : c.terms()) {
            (void)coeff;
            if (species >= n) throw NetworkError("complex refers to an unknown species index");
        }
        auto it = std::find(net.complexes_.begin(), net.complexes_.end(), c);
        if (it != net.complexes_.end()) return static_cast<std::size_t>(it - net.complexes_.begin());
        net.complexes_.push_back(c);
        return net.complexes_.size() - 1;
    };

    for (std::size_t r = 0; r < reactions.size(); ++r) {
        auto& spec = reactions[r];
        if (spec.source == spec.product) {
            throw NetworkError("reaction " + std::to_string(r) + " has identical source and product " +
                               format_complex(spec.source, species_names));
        }
        if (spec.rate_law.is_mass_action() && !(spec.rate_law.kappa() > 0.0)) {
            throw NetworkError("reaction " + std::to_string(r) +
                               " has a non-positive mass-action rate constant");
        }
        Reaction reaction;
        reaction.source_complex = intern(spec.source);
        reaction.product_complex = intern(spec.product);
        reaction.reaction_vector.assign(n, 0);
        for (const auto& [s, c] : spec.product.terms()) reaction.reaction_vector[s] += c;
        for (const auto& [s, c] : spec.source.terms()) reaction.reaction_vector[s] -= c;
        reaction.source = std::move(spec.source);
        reaction.product = std::move(spec.product);
        reaction.rate_law = std::move(spec.rate_law);
        net.reactions_.push_back(std::move(reaction));
    }

    std::vector<bool> used(n, false);
    for (const auto& c : net.complexes_) {
        for (const auto& t : c.terms()) used[t.first] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        if (!allow_unused_species) {
            throw NetworkError("species '" + species_names[i] + "' appears in no complex");
        }
        spdlog::warn("species '{}' appears in no complex", species_names[i]);
    }
    net.constants_ = std::move(constants);
    return net;
}

std::optional<std::size_t> ReactionNetwork::species_index(const std::string& name) const {
    for (const auto& s : species_) {
        if (s.name == name) return s.index;
    }
    return std::nullopt;
}

std::optional<double> ReactionNetwork::constant_value(const std::string& name) const {
    for (const auto& c : constants_) {
        if (c.name == name) return c.value;
    }
    return std::nullopt;
}

bool ReactionNetwork::all_mass_action() const {
    return std::all_of(reactions_.begin(), reactions_.end(),
                       [](const Reaction& r) { return r.rate_law.is_mass_action(); });
}

ReactionNetwork ReactionNetwork::with_rate_laws(std::vector<RateLaw> laws) const {
    if (laws.size() != reactions_.size()) throw NetworkError("rate law count mismatch");
    ReactionNetwork copy = *this;
    for (std::size_t r = 0; r < laws.size(); ++r) copy.reactions_[r].rate_law = std::move(laws[r]);
    return copy;
}

std::string ReactionNetwork::complex_to_string(const Complex& c) const {
    std::vector<std::string> names;
    names.reserve(species_.size());
    for (const auto& s : species_) names.push_back(s.name);
    return format_complex(c, names);
}

bool ReactionNetwork::operator==(const ReactionNetwork& other) const {
    if (species_ != other.species_ || complexes_ != other.complexes_ ||
        constants_ != other.constants_ || reactions_.size() != other.reactions_.size()) {
        return false;
    }
    for (std::size_t r = 0; r < reactions_.size(); ++r) {
        const auto& a = reactions_[r];
        const auto& b = other.reactions_[r];
        if (a.source != b.source || a.product != b.product || !(a.rate_law == b.rate_law)) {
            return false;
        }
    }
    return true;
}

std::string format_complex(const Complex& c, std::span<const std::string> names) {
    if (c.empty()) return "0";
    std::string out;
    for (const auto& [species, coeff] : c.terms()) {
        if (!out.empty()) out += " + ";
        if (coeff != 1) out += std::to_string(coeff);
        out += names[species];
    }
    return out;
}

}  // namespace acr
