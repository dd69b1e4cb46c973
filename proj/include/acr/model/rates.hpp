#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "acr/model/network.hpp"

namespace acr {

/// x!/(x-k)! for 0 <= k <= x; 0 when x < k. Throws EvaluationError on
/// 64-bit overflow.
Count falling_factorial(Count x, Count k);

/// v!/(v-y)! over all species as a double (the stochastic mass-action
/// combinatorial factor); 0 unless v >= y component-wise.
double falling_factorial_product(const Complex& y, std::span<const Count> v);

/// z^y with 0^0 = 1.
double monomial(const Complex& y, std::span<const double> z);

/// Stochastic intensity of reaction `r` at integer state `x`.
double evaluate_rate(const ReactionNetwork& net, std::size_t r, std::span<const Count> x);

/// Deterministic intensity of reaction `r` at concentration vector `z`.
double evaluate_deterministic_rate(const ReactionNetwork& net, std::size_t r,
                                   std::span<const double> z);

/// Human-readable `A + B -> 2B` label for error messages and reports.
std::string describe_reaction(const ReactionNetwork& net, std::size_t r);

}  // namespace acr
