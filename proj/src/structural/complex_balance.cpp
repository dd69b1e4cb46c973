#include "acr/structural/complex_balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acr/model/rates.hpp"
#include "acr/structural/structure.hpp"
#include "acr/util/error.hpp"

namespace acr {

std::vector<double> complex_balance_residuals(const ReactionNetwork& net,
                                              std::span<const double> z) {
    const std::size_t nc = net.complexes().size();
    std::vector<double> out(nc, 0.0), in(nc, 0.0);
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        const double rate = evaluate_deterministic_rate(net, r, z);
        out[net.reactions()[r].source_complex] += rate;
        in[net.reactions()[r].product_complex] += rate;
    }
    std::vector<double> res(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const double big = std::max(out[c], in[c]);
        res[c] = big > 0.0 ? std::abs(out[c] - in[c]) / big : 0.0;
    }
    return res;
}

ComplexBalanceCertificate certify_complex_balance(const ReactionNetwork& net,
                                                  std::optional<std::vector<double>> hint,
                                                  const BalanceOptions& opt) {
    if (!net.all_mass_action()) {
        throw NetworkError("complex-balance certification requires mass-action kinetics");
    }
    ComplexBalanceCertificate cert;
    const auto report = analyze_structure(net);
    if (!opt.force_numeric && report.deficiency == 0 && report.weakly_reversible) {
        cert.status = BalanceStatus::AllRateConstants;
        cert.diagnostic = "deficiency zero and weakly reversible";
        return cert;
    }

    std::vector<double> anchor = hint ? *hint : std::vector<double>(net.num_species(), 1.0);
    auto eq = find_positive_equilibrium(net, anchor, opt.equilibrium);
    if (!eq) {
        cert.status = BalanceStatus::NotComplexBalanced;
        cert.diagnostic = "no equilibrium";
        cert.witness_residual = std::numeric_limits<double>::infinity();
        return cert;
    }
    cert.point = eq->concentrations;
    cert.residuals = complex_balance_residuals(net, cert.point);
    const auto worst = std::max_element(cert.residuals.begin(), cert.residuals.end());
    cert.witness_complex = static_cast<std::size_t>(worst - cert.residuals.begin());
    cert.witness_residual = *worst;
    if (cert.witness_residual < opt.rel_tol) {
        cert.status = BalanceStatus::AtEquilibrium;
        cert.diagnostic = "balanced at a positive equilibrium";
    } else {
        cert.status = BalanceStatus::NotComplexBalanced;
        cert.diagnostic = "complex " + net.complex_to_string(net.complexes()[cert.witness_complex]) +
                          " is unbalanced at the equilibrium";
    }
    return cert;
}

std::string to_string(BalanceStatus status) {
    switch (status) {
    case BalanceStatus::AllRateConstants: return "all_rate_constants";
    case BalanceStatus::AtEquilibrium: return "at_equilibrium";
    case BalanceStatus::NotComplexBalanced: return "not_complex_balanced";
    }
    return "unknown";
}

nlohmann::ordered_json to_json(const ComplexBalanceCertificate& cert, const ReactionNetwork& net) {
    nlohmann::ordered_json j;
    j["status"] = to_string(cert.status);
    j["diagnostic"] = cert.diagnostic;
    if (!cert.point.empty()) {
        j["point"] = cert.point;
        j["residuals"] = cert.residuals;
    }
    if (cert.status == BalanceStatus::NotComplexBalanced && !cert.residuals.empty()) {
        j["witness_complex"] = net.complex_to_string(net.complexes()[cert.witness_complex]);
        j["witness_residual"] = cert.witness_residual;
    }
    return j;
}

}  // namespace acr
