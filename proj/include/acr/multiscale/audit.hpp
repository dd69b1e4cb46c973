#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "acr/multiscale/reduction.hpp"

namespace acr {

/// One hypothesis check. `status` is "pass", "fail", "unknown" or
/// "not verified"; `evidence` holds the machine-checkable witnesses.
struct AuditCheck {
    std::string name;
    std::string status = "unknown";
    std::string detail;
    nlohmann::ordered_json evidence = nlohmann::ordered_json::object();

    bool passed() const { return status == "pass"; }
};

struct AssumptionAudit {
    /// Every discrete species is changed by some reaction with beta_r = 1.
    AuditCheck discrete_fast;
    /// S_d^w is complex balanced at the sampled w.
    AuditCheck complex_balanced;
    /// The reduced solution z(t) stays positive on [0, T].
    AuditCheck limit_positive;
    /// At most one discrete species, with coefficient 1, per complex, plus
    /// polynomial rate envelopes.
    AuditCheck corollary_structural;

    std::vector<const AuditCheck*> checks() const {
        return {&discrete_fast, &complex_balanced, &limit_positive, &corollary_structural};
    }
    bool all_pass() const;
};

struct AuditOptions {
    std::size_t w_samples = 10;
    double w_low = 0.1;
    double w_high = 10.0;
    std::uint64_t seed = 20261018;
    DiscreteAveraging mode = DiscreteAveraging::ProductForm;
    /// Per-coordinate bound of the lattice used for the reachability check.
    Count lattice_cap = 200;
};

/// Runs all four checks; failures are report entries, never exceptions.
/// `x0` is the full initial vector (counts on X_d, concentrations on X_c).
AssumptionAudit audit_assumptions(const DiscreteReduction& discrete, std::span<const double> x0,
                                  double T, const AuditOptions& options = {});

nlohmann::ordered_json to_json(const AssumptionAudit& audit);
std::string audit_text(const AssumptionAudit& audit);

}  // namespace acr
