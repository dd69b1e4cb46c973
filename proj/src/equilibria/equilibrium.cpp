#include "acr/equilibria/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "acr/dynamics/ode.hpp"
#include "acr/dynamics/rng.hpp"
#include "acr/model/rates.hpp"
#include "acr/structural/structure.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

struct System {
    const ReactionNetwork& net;
    std::vector<double> kappa;
    Eigen::MatrixXd basis;        // s x n, rows span the stoichiometric subspace
    Eigen::MatrixXd conservation; // (n-s) x n
    Eigen::VectorXd targets;      // conservation * anchor
    Eigen::VectorXd class_scale;  // 1 + |T|.anchor
};

Eigen::MatrixXd to_eigen(const RationalMatrix& m, std::size_t cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = to_double(m[i][j]);
    }
    return out;
}

void rates_at(const System& sys, const Eigen::VectorXd& z, std::vector<double>& rates) {
    const auto& net = sys.net;
    rates.resize(net.num_reactions());
    std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        rates[r] = sys.kappa[r] * monomial(net.reactions()[r].source, zs);
    }
}

Eigen::VectorXd rhs_of(const ReactionNetwork& net, const std::vector<double>& rates) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.num_species()));
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        const auto& xi = net.reactions()[r].reaction_vector;
        for (std::size_t i = 0; i < xi.size(); ++i) f(i) += static_cast<double>(xi[i]) * rates[r];
    }
    return f;
}

struct Evaluation {
    Eigen::VectorXd residual;
    double rhs_max = 0.0;
    double rate_max = 0.0;
    double class_max = 0.0;
    // max_i |f_i| / sum_r |xi_ri| lambda_r: how far the fluxes are from cancelling.
    double cancellation = 0.0;
};

Evaluation evaluate_system(const System& sys, const Eigen::VectorXd& z, std::vector<double>& rates) {
    rates_at(sys, z, rates);
    const Eigen::VectorXd f = rhs_of(sys.net, rates);
    Evaluation ev;
    ev.rate_max = rates.empty() ? 0.0 : *std::max_element(rates.begin(), rates.end());
    ev.rhs_max = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    Eigen::VectorXd gross = Eigen::VectorXd::Zero(f.size());
    for (std::size_t r = 0; r < sys.net.num_reactions(); ++r) {
        const auto& xi = sys.net.reactions()[r].reaction_vector;
        for (std::size_t i = 0; i < xi.size(); ++i) gross(i) += std::abs(static_cast<double>(xi[i])) * rates[r];
    }
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (gross(i) > 0.0) ev.cancellation = std::max(ev.cancellation, std::abs(f(i)) / gross(i));
    }
    const double rate_scale = 1.0 + ev.rate_max;
    const Eigen::VectorXd top = sys.basis * f / rate_scale;
    Eigen::VectorXd bottom = sys.conservation * z - sys.targets;
    bottom = bottom.cwiseQuotient(sys.class_scale);
    ev.class_max = bottom.size() ? bottom.cwiseAbs().maxCoeff() : 0.0;
    ev.residual.resize(top.size() + bottom.size());
    ev.residual << top, bottom;
    return ev;
}

constexpr double kCancellationTol = 1e-8;

bool accepted(const Evaluation& ev, const EquilibriumOptions& opt) {
    // The relative test rejects points that only look stationary because every
    // rate has decayed towards a boundary equilibrium.
    return ev.rhs_max < opt.residual_tol * (1.0 + ev.rate_max) && ev.class_max < opt.class_tol &&
           ev.cancellation < kCancellationTol;
}

// Damped Newton in log coordinates. Returns the final point; `converged`
// reports acceptance.
Eigen::VectorXd newton(const System& sys, Eigen::VectorXd u, const EquilibriumOptions& opt,
                       bool& converged) {
    const auto& net = sys.net;
    const std::size_t n = net.num_species();
    std::vector<double> rates;
    converged = false;
    Eigen::VectorXd z = u.array().exp();
    Evaluation ev = evaluate_system(sys, z, rates);
    for (int it = 0; it < opt.max_newton_iterations; ++it) {
        if (accepted(ev, opt)) {
            converged = true;
            return z;
        }
        const double rate_scale = 1.0 + ev.rate_max;
        // d rhs / d u_j = sum_r xi_r lambda_r y_rj  (mass action)
        Eigen::MatrixXd dfdu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < net.num_reactions(); ++r) {
            const auto& reaction = net.reactions()[r];
            for (const auto& [j, coeff] : reaction.source.terms()) {
                const double d = rates[r] * static_cast<double>(coeff);
                for (std::size_t i = 0; i < n; ++i) {
                    if (reaction.reaction_vector[i] != 0) {
                        dfdu(i, j) += static_cast<double>(reaction.reaction_vector[i]) * d;
                    }
                }
            }
        }
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        jac.topRows(sys.basis.rows()) = sys.basis * dfdu / rate_scale;
        Eigen::MatrixXd cons = sys.conservation * z.asDiagonal();
        for (Eigen::Index i = 0; i < cons.rows(); ++i) cons.row(i) /= sys.class_scale(i);
        jac.bottomRows(cons.rows()) = cons;

        Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-ev.residual);
        if (!step.allFinite()) return z;
        const double biggest = step.cwiseAbs().maxCoeff();
        if (biggest > 2.0) step *= 2.0 / biggest;

        const double f0 = ev.residual.norm();
        double alpha = 1.0;
        bool improved = false;
        for (int k = 0; k < 40; ++k) {
            const Eigen::VectorXd trial_u = u + alpha * step;
            const Eigen::VectorXd trial_z = trial_u.array().exp();
            Evaluation trial;
            try {
                trial = evaluate_system(sys, trial_z, rates);
            } catch (const EvaluationError&) {
                alpha *= 0.5;
                continue;
            }
            if (trial.residual.allFinite() && trial.residual.norm() < (1.0 - 1e-4 * alpha) * f0) {
                u = trial_u;
                z = trial_z;
                ev = trial;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            rates_at(sys, z, rates);
            break;  // stagnation
        }
        if (z.minCoeff() < opt.boundary) break;
    }
    converged = accepted(ev, opt);
    return z;
}

}  // namespace

double rhs_residual(const ReactionNetwork& net, std::span<const double> z) {
    std::vector<double> rates(net.num_reactions());
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        rates[r] = evaluate_deterministic_rate(net, r, z);
    }
    const Eigen::VectorXd f = rhs_of(net, rates);
    return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
}

EquilibriumSolver::EquilibriumSolver(const ReactionNetwork& net) : net_(net) {
    if (!net.all_mass_action()) {
        throw NetworkError("equilibrium search requires mass-action kinetics");
    }
    const std::size_t n = net.num_species();
    basis_ = to_eigen(stoichiometric_basis(net), n);
    conservation_ = to_eigen(analyze_structure(net).conservation_basis, n);
    kappa_.reserve(net.num_reactions());
    for (const auto& r : net.reactions()) kappa_.push_back(r.rate_law.kappa());
}

std::optional<EquilibriumPoint> EquilibriumSolver::solve(std::span<const double> anchor,
                                                         const EquilibriumOptions& opt) const {
    return solve(kappa_, anchor, opt);
}

std::optional<EquilibriumPoint> EquilibriumSolver::solve(std::span<const double> kappa,
                                                         std::span<const double> anchor,
                                                         const EquilibriumOptions& opt) const {
    const auto& net = net_;
    const std::size_t n = net.num_species();
    if (anchor.size() != n) throw EvaluationError("anchor length mismatch");
    if (kappa.size() != net.num_reactions()) throw EvaluationError("rate constant count mismatch");
    for (double a : anchor) {
        if (!(a > 0.0)) throw EvaluationError("equilibrium anchor must be positive");
    }

    System sys{net, std::vector<double>(kappa.begin(), kappa.end()), basis_, conservation_, {}, {}};
    const Eigen::Map<const Eigen::VectorXd> a(anchor.data(), static_cast<Eigen::Index>(n));
    sys.targets = sys.conservation * a;
    sys.class_scale = Eigen::VectorXd::Ones(sys.conservation.rows()) +
                      sys.conservation.cwiseAbs() * a;

    auto finish = [&](const Eigen::VectorXd& z, std::string method) {
        EquilibriumPoint p;
        p.concentrations.assign(z.data(), z.data() + z.size());
        p.anchor.assign(anchor.begin(), anchor.end());
        std::vector<double> rates;
        rates_at(sys, z, rates);
        const Eigen::VectorXd f = rhs_of(net, rates);
        p.residual_norm = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
        p.method = std::move(method);
        return p;
    };

    Philox rng(mix64(opt.seed));
    const Eigen::VectorXd log_anchor = a.array().log();
    for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
        Eigen::VectorXd u0 = log_anchor;
        if (attempt > 0) {
            for (Eigen::Index i = 0; i < u0.size(); ++i) u0(i) += rng.uniform() - 0.5;
        }
        bool ok = false;
        const Eigen::VectorXd z = newton(sys, u0, opt, ok);
        if (ok && z.minCoeff() >= opt.boundary) return finish(z, "newton");
        if (z.minCoeff() >= opt.boundary) break;  // stagnation in the interior: go to ODE
    }

    // Fallback: follow the flow, which stays in the compatibility class, and
    // restart Newton from progressively later points.
    OdeOptions ode_opt;
    ode_opt.dense = false;
    ode_opt.min_samples_per_step = 0;
    // Well below the boundary test, so a coordinate decaying to zero is seen
    // as such instead of stalling at the absolute-error floor.
    ode_opt.atol = 1e-3 * opt.boundary * std::max(1.0, a.maxCoeff());
    const OdeRhs rhs = [&sys](double, std::span<const double> z, std::span<double> dz) {
        std::fill(dz.begin(), dz.end(), 0.0);
        for (std::size_t r = 0; r < sys.net.num_reactions(); ++r) {
            const auto& reaction = sys.net.reactions()[r];
            const double rate = sys.kappa[r] * monomial(reaction.source, z);
            for (std::size_t i = 0; i < dz.size(); ++i) {
                dz[i] += static_cast<double>(reaction.reaction_vector[i]) * rate;
            }
        }
    };
    std::vector<double> state(anchor.begin(), anchor.end());
    double t = 0.0;
    for (double horizon = 1.0; horizon <= opt.ode_horizon; horizon *= 10.0) {
        try {
            const OdeSolution sol = integrate_ode(rhs, state, t, horizon, ode_opt);
            state = sol.final_state();
            t = horizon;
        } catch (const Error& e) {
            spdlog::debug("equilibrium ODE fallback stopped: {}", e.what());
            return std::nullopt;
        }
        const double scale = *std::max_element(state.begin(), state.end());
        if (*std::min_element(state.begin(), state.end()) < opt.boundary * std::max(1.0, scale)) {
            return std::nullopt;
        }
        Eigen::VectorXd u(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) u(i) = std::log(state[i]);
        bool ok = false;
        const Eigen::VectorXd z = newton(sys, u, opt, ok);
        if (ok && z.minCoeff() >= opt.boundary) return finish(z, "ode+newton");
    }
    return std::nullopt;
}

std::optional<EquilibriumPoint> find_positive_equilibrium(const ReactionNetwork& net,
                                                          std::span<const double> anchor,
                                                          const EquilibriumOptions& opt) {
    return EquilibriumSolver(net).solve(anchor, opt);
}

AcrReport detect_acr(const ReactionNetwork& net, const AcrOptions& opt) {
    if (opt.num_classes < 2) throw ConfigError("ACR detection needs at least two classes");
    AcrReport rep;
    const std::size_t n = net.num_species();
    const EquilibriumSolver solver(net);
    Philox rng(mix64(opt.seed));
    const double lo = std::log(opt.anchor_low), hi = std::log(opt.anchor_high);
    for (std::size_t k = 0; k < opt.num_classes; ++k) {
        std::vector<double> anchor(n);
        for (auto& x : anchor) x = std::exp(lo + (hi - lo) * rng.uniform());
        ++rep.anchors_tried;
        EquilibriumOptions eopt = opt.equilibrium;
        eopt.seed = mix64(opt.seed + k);
        auto eq = solver.solve(anchor, eopt);
        if (eq) rep.equilibria.push_back(std::move(*eq));
    }
    rep.equilibria_sampled = rep.equilibria.size();

    auto rel_diff = [](double a, double b) {
        return std::abs(a - b) / std::max(std::min(std::abs(a), std::abs(b)), 1e-300);
    };
    bool distinct = false;
    for (std::size_t i = 1; i < rep.equilibria.size() && !distinct; ++i) {
        for (std::size_t s = 0; s < n; ++s) {
            if (rel_diff(rep.equilibria[0].concentrations[s], rep.equilibria[i].concentrations[s]) >
                opt.rel_tol) {
                distinct = true;
                break;
            }
        }
    }
    rep.non_degenerate = distinct;
    if (rep.equilibria.size() < 2) {
        rep.warnings.push_back("fewer than two positive equilibria found; ACR is degenerate");
    } else if (!distinct) {
        rep.warnings.push_back("all sampled classes share one equilibrium; ACR is degenerate");
    }
    if (rep.equilibria.empty()) return rep;

    for (std::size_t s = 0; s < n; ++s) {
        double lo_v = rep.equilibria[0].concentrations[s], hi_v = lo_v, sum = 0.0;
        for (const auto& e : rep.equilibria) {
            lo_v = std::min(lo_v, e.concentrations[s]);
            hi_v = std::max(hi_v, e.concentrations[s]);
            sum += e.concentrations[s];
        }
        if ((hi_v - lo_v) / lo_v < opt.rel_tol) {
            rep.acr_species.push_back(s);
            rep.acr_values[s] = sum / static_cast<double>(rep.equilibria.size());
        }
    }
    return rep;
}

nlohmann::ordered_json to_json(const AcrReport& rep, const ReactionNetwork& net) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["evidence"] = "numerical evidence (sampled equilibria), not a proof";
    ordered_json species = ordered_json::array();
    ordered_json values = ordered_json::object();
    for (auto s : rep.acr_species) {
        species.push_back(net.species()[s].name);
        values[net.species()[s].name] = rep.acr_values.at(s);
    }
    j["acr_species"] = species;
    j["acr_values"] = values;
    j["non_degenerate"] = rep.non_degenerate;
    j["equilibria_sampled"] = rep.equilibria_sampled;
    j["anchors_tried"] = rep.anchors_tried;
    ordered_json eqs = ordered_json::array();
    for (const auto& e : rep.equilibria) {
        ordered_json item;
        item["anchor"] = e.anchor;
        item["point"] = e.concentrations;
        item["residual"] = e.residual_norm;
        item["method"] = e.method;
        eqs.push_back(item);
    }
    j["equilibria"] = eqs;
    j["warnings"] = rep.warnings;
    return j;
}

}  // namespace acr
