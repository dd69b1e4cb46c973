#include "acr/multiscale/audit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "acr/dynamics/ode.hpp"
#include "acr/dynamics/rng.hpp"
#include "acr/model/rates.hpp"
#include "acr/structural/structure.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

AuditCheck check_discrete_fast(const DiscreteReduction& d) {
    AuditCheck c{"discrete_fast", "pass", "", nlohmann::ordered_json::object()};
    const auto& net = d.base();
    const auto& betas = d.kinetics().betas();
    nlohmann::ordered_json witnesses = nlohmann::ordered_json::object();
    for (std::size_t s : d.species()) {
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (std::size_t r = 0; r < net.num_reactions(); ++r) {
            if (betas[r] == 1 && net.reactions()[r].reaction_vector[s] != 0) list.push_back(r);
        }
        if (list.empty()) {
            c.status = "fail";
            c.detail = "no reaction with beta = 1 changes " + net.species()[s].name;
        }
        witnesses[net.species()[s].name] = list;
    }
    c.evidence["witness_reactions"] = witnesses;
    if (c.passed()) c.detail = "every discrete species is changed by a fast reaction";
    return c;
}

// Reachable set of the reduced chain from `start` inside [0, cap]^n and
// whether every reachable state can return to it.
nlohmann::ordered_json reachability(const DiscreteReduction& d, std::vector<Count> start, Count cap) {
    const auto& red = d.reactions();
    const std::size_t n = d.species().size();
    std::map<std::vector<Count>, std::size_t> index{{start, 0}};
    std::vector<std::vector<Count>> states{start};
    std::vector<std::vector<std::size_t>> back(1);
    std::deque<std::size_t> queue{0};
    bool truncated = false;
    while (!queue.empty()) {
        const std::size_t s = queue.front();
        queue.pop_front();
        const auto x = states[s];
        for (const auto& k : red) {
            bool enabled = true;
            std::vector<Count> y = x;
            for (std::size_t i = 0; i < n; ++i) {
                if (x[i] < k.source[i]) enabled = false;
                y[i] += k.product[i] - k.source[i];
                if (y[i] > cap) {
                    enabled = false;
                    truncated = true;
                }
            }
            if (!enabled) continue;
            auto it = index.find(y);
            if (it == index.end()) {
                it = index.emplace(y, states.size()).first;
                states.push_back(y);
                back.emplace_back();
                queue.push_back(it->second);
            }
            back[it->second].push_back(s);
        }
    }
    std::vector<bool> returns(states.size(), false);
    returns[0] = true;
    std::deque<std::size_t> rq{0};
    while (!rq.empty()) {
        const std::size_t s = rq.front();
        rq.pop_front();
        for (std::size_t p : back[s]) {
            if (!returns[p]) {
                returns[p] = true;
                rq.push_back(p);
            }
        }
    }
    nlohmann::ordered_json j;
    j["start"] = start;
    j["lattice_cap"] = cap;
    j["reachable_states"] = states.size();
    j["cap_reached"] = truncated;
    j["irreducible"] = std::all_of(returns.begin(), returns.end(), [](bool b) { return b; });
    return j;
}

AuditCheck check_complex_balanced(const DiscreteReduction& d, std::span<const double> x0,
                                  const AuditOptions& opt) {
    AuditCheck c{"complex_balanced", "pass", "", nlohmann::ordered_json::object()};
    if (d.species().empty()) {
        c.detail = "no discrete species";
        return c;
    }
    if (d.reactions().empty()) {
        c.status = "fail";
        c.detail = "the discrete reduction has no reactions";
        return c;
    }
    const std::size_t nc = d.continuous().size();
    const auto structure = analyze_structure(d.network_at(std::vector<double>(nc, 1.0)));
    c.evidence["deficiency"] = structure.deficiency;
    c.evidence["weakly_reversible"] = structure.weakly_reversible;
    const bool shortcut = structure.deficiency == 0 && structure.weakly_reversible;

    Philox rng(mix64(opt.seed));
    const double lo = std::log(opt.w_low), hi = std::log(opt.w_high);
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    bool all = true;
    for (std::size_t s = 0; s < opt.w_samples; ++s) {
        std::vector<double> w(nc);
        for (auto& x : w) x = std::exp(lo + (hi - lo) * rng.uniform());
        const auto eq = d.equilibrium(w);
        nlohmann::ordered_json j;
        j["w"] = w;
        j["found"] = eq.found;
        if (eq.found) {
            j["q"] = eq.q;
            j["residual"] = eq.residual;
            j["witness_complex"] = eq.witness_complex;
        }
        j["balanced"] = eq.balanced;
        samples.push_back(j);
        all = all && eq.balanced;
    }
    c.evidence["samples"] = samples;

    if (d.species().size() <= 2) {
        std::vector<Count> start;
        for (std::size_t i : d.species()) start.push_back(static_cast<Count>(std::llround(x0[i])));
        c.evidence["reachability"] = reachability(d, start, opt.lattice_cap);
    } else {
        c.evidence["reachability"] = "unknown";
    }

    if (shortcut) {
        c.detail = "deficiency zero and weakly reversible: balanced for every w";
        if (!all) c.detail += " (a numeric sample disagreed; see evidence)";
    } else if (all) {
        c.detail = "balanced at all " + std::to_string(opt.w_samples) + " sampled w";
    } else {
        c.status = "fail";
        c.detail = "S_d^w is not complex balanced at a sampled w";
    }
    return c;
}

AuditCheck check_limit_positive(const DiscreteReduction& d, std::span<const double> x0, double T,
                                const AuditOptions& opt, bool balanced) {
    AuditCheck c{"limit_positive", "unknown", "", nlohmann::ordered_json::object()};
    c.evidence["T"] = T;
    if (opt.mode == DiscreteAveraging::ProductForm && !balanced) {
        c.detail = "S_c is undefined without a complex-balanced discrete reduction";
        return c;
    }
    try {
        const ContinuousReduction cont(d, opt.mode);
        const auto z0 = cont.initial_state(x0);
        if (z0.empty()) {
            c.status = "pass";
            c.detail = "no continuous species";
            return c;
        }
        OdeOptions ode;
        ode.min_samples_per_step = 8;
        const auto sol = integrate_ode(cont.rhs(), z0, T, ode);
        c.evidence["min_z"] = sol.min_coordinate();
        c.evidence["z_T"] = sol.final_state();
        if (sol.min_coordinate() > 0.0) {
            c.status = "pass";
            c.detail = "z(t) > 0 on [0, T]";
        } else {
            c.status = "fail";
            c.detail = "z(t) leaves the positive orthant";
        }
    } catch (const StepSizeUnderflow& e) {
        c.status = "fail";
        c.detail = e.what();
        c.evidence["last_t"] = e.last_t();
    } catch (const AssumptionViolation& e) {
        c.status = "fail";
        c.detail = e.what();
    }
    return c;
}

AuditCheck check_corollary(const DiscreteReduction& d) {
    AuditCheck c{"corollary_structural", "pass", "", nlohmann::ordered_json::object()};
    const auto& net = d.base();
    const auto& xd = d.species();
    nlohmann::ordered_json offending = nlohmann::ordered_json::array();
    for (const auto& y : net.complexes()) {
        int count = 0;
        bool unit = true;
        for (std::size_t s : xd) {
            const Count k = y.coefficient(s);
            if (k > 0) ++count;
            if (k > 1) unit = false;
        }
        if (count > 1 || !unit) offending.push_back(net.complex_to_string(y));
    }
    c.evidence["offending_complexes"] = offending;

    // Envelopes: mass action is polynomial; expression laws are probed for
    // growth of N^-beta lambda^N / v^y in v.
    nlohmann::ordered_json envelopes = nlohmann::ordered_json::object();
    bool envelope_ok = true;
    const auto& kin = d.kinetics();
    const auto grid = continuous_probe_grid(d.continuous().size(), 27);
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        if (net.reactions()[r].rate_law.is_mass_action()) continue;
        double near = 0.0, far = 0.0;
        for (const auto& w : grid) {
            for (double N : {1e2, 1e4}) {
                for (Count k = 0; k <= 40; ++k) {
                    std::vector<double> v;
                    double mono = 1.0;
                    for (std::size_t s : xd) {
                        const Count y = net.reactions()[r].source.coefficient(s);
                        v.push_back(static_cast<double>(y + k));
                        mono *= std::pow(static_cast<double>(y + k), static_cast<double>(y));
                    }
                    const double ratio = kin.scaled_rate(r, d.full_state(v, w), N) / mono;
                    (k <= 20 ? near : far) = std::max(k <= 20 ? near : far, ratio);
                }
            }
        }
        const bool ok = far <= 2.0 * near + 1e-12;
        envelopes[std::to_string(r)] = {{"h_hat", near}, {"bounded", ok}};
        envelope_ok = envelope_ok && ok;
    }
    c.evidence["expression_envelopes"] = envelopes;

    if (!offending.empty()) {
        c.status = "fail";
        c.detail = "complex " + offending[0].get<std::string>() +
                   " has more than one discrete species or a coefficient above 1";
    } else if (!envelope_ok) {
        c.status = "not verified";
        c.detail = "an expression rate grows faster than its discrete monomial";
    } else {
        c.detail = envelopes.empty() ? "mass-action kinetics" : "numeric envelopes bounded";
    }
    return c;
}

}  // namespace

bool AssumptionAudit::all_pass() const {
    const auto list = checks();
    return std::all_of(list.begin(), list.end(), [](const AuditCheck* c) { return c->passed(); });
}

AssumptionAudit audit_assumptions(const DiscreteReduction& d, std::span<const double> x0, double T,
                                  const AuditOptions& opt) {
    AssumptionAudit a;
    a.discrete_fast = check_discrete_fast(d);
    a.complex_balanced = check_complex_balanced(d, x0, opt);
    if (opt.mode == DiscreteAveraging::Stationary && !a.complex_balanced.passed()) {
        a.complex_balanced.detail += "; stationary averaging replaces q_d^w";
    }
    a.limit_positive = check_limit_positive(d, x0, T, opt, a.complex_balanced.passed());
    a.corollary_structural = check_corollary(d);
    return a;
}

nlohmann::ordered_json to_json(const AssumptionAudit& audit) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto* c : audit.checks()) {
        j[c->name] = {{"status", c->status}, {"detail", c->detail}, {"evidence", c->evidence}};
    }
    j["all_pass"] = audit.all_pass();
    return j;
}

std::string audit_text(const AssumptionAudit& audit) {
    std::string out = "assumption audit:\n";
    for (const auto* c : audit.checks()) {
        out += "  " + c->name + ": " + c->status + " (" + c->detail + ")\n";
    }
    return out;
}

}  // namespace acr
