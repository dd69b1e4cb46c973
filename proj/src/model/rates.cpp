#include "acr/model/rates.hpp"

#include <cmath>
#include <vector>

#include "acr/util/error.hpp"

namespace acr {

Count falling_factorial(Count x, Count k) {
    if (k < 0) throw EvaluationError("negative falling factorial order");
    if (x < k) return 0;
    Count result = 1;
    for (Count j = 0; j < k; ++j) {
        if (__builtin_mul_overflow(result, x - j, &result)) {
            throw EvaluationError("falling factorial " + std::to_string(x) + "!/(" +
                                  std::to_string(x) + "-" + std::to_string(k) +
                                  ")! overflows 64-bit integers");
        }
    }
    return result;
}

double falling_factorial_product(const Complex& y, std::span<const Count> v) {
    double result = 1.0;
    for (const auto& [species, coeff] : y.terms()) {
        const Count ff = falling_factorial(v[species], coeff);
        if (ff == 0) return 0.0;
        result *= static_cast<double>(ff);
    }
    return result;
}

double monomial(const Complex& y, std::span<const double> z) {
    double result = 1.0;
    for (const auto& [species, coeff] : y.terms()) {
        result *= std::pow(z[species], static_cast<double>(coeff));
    }
    return result;
}

std::string describe_reaction(const ReactionNetwork& net, std::size_t r) {
    const auto& reaction = net.reactions().at(r);
    return "#" + std::to_string(r) + " (" + net.complex_to_string(reaction.source) + " -> " +
           net.complex_to_string(reaction.product) + ")";
}

namespace {

double checked(const ReactionNetwork& net, std::size_t r, double value) {
    if (std::isnan(value) || value < 0.0) {
        throw EvaluationError("rate law of reaction " + describe_reaction(net, r) +
                              " evaluated to " + std::to_string(value));
    }
    return value;
}

}  // namespace

double evaluate_rate(const ReactionNetwork& net, std::size_t r, std::span<const Count> x) {
    const auto& reaction = net.reactions().at(r);
    if (x.size() != net.num_species()) throw EvaluationError("state length mismatch");
    for (const auto& [species, coeff] : reaction.source.terms()) {
        if (x[species] < coeff) return 0.0;
    }
    if (reaction.rate_law.is_mass_action()) {
        return reaction.rate_law.kappa() * falling_factorial_product(reaction.source, x);
    }
    std::vector<double> vars(x.begin(), x.end());
    return checked(net, r, evaluate(*reaction.rate_law.as_expression().body, vars));
}

double evaluate_deterministic_rate(const ReactionNetwork& net, std::size_t r,
                                   std::span<const double> z) {
    const auto& reaction = net.reactions().at(r);
    if (z.size() != net.num_species()) throw EvaluationError("state length mismatch");
    if (reaction.rate_law.is_mass_action()) {
        return reaction.rate_law.kappa() * monomial(reaction.source, z);
    }
    return checked(net, r, evaluate(*reaction.rate_law.as_expression().body, z));
}

}  // namespace acr
