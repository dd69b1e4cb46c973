#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "acr/equilibria/equilibrium.hpp"
#include "acr/model/network.hpp"

namespace acr {

enum class BalanceStatus { AllRateConstants, AtEquilibrium, NotComplexBalanced };

struct ComplexBalanceCertificate {
    BalanceStatus status = BalanceStatus::NotComplexBalanced;
    /// Equilibrium used for the numeric check (empty for AllRateConstants).
    std::vector<double> point;
    /// Per-complex |out - in| / max(out, in) at `point`.
    std::vector<double> residuals;
    std::size_t witness_complex = 0;
    double witness_residual = 0.0;
    std::string diagnostic;

    bool balanced() const { return status != BalanceStatus::NotComplexBalanced; }
};

struct BalanceOptions {
    double rel_tol = 1e-9;
    /// Skip the deficiency-zero shortcut and always check at an equilibrium.
    bool force_numeric = false;
    EquilibriumOptions equilibrium;
};

/// Per-complex balance residuals of a mass-action network at z.
std::vector<double> complex_balance_residuals(const ReactionNetwork& net,
                                              std::span<const double> z);

ComplexBalanceCertificate certify_complex_balance(
    const ReactionNetwork& net, std::optional<std::vector<double>> equilibrium_hint = std::nullopt,
    const BalanceOptions& options = {});

std::string to_string(BalanceStatus status);

nlohmann::ordered_json to_json(const ComplexBalanceCertificate& cert, const ReactionNetwork& net);

}  // namespace acr
