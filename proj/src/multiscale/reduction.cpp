#include "acr/multiscale/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "acr/equilibria/equilibrium.hpp"
#include "acr/model/rates.hpp"
#include "acr/statistics/stationary.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

constexpr double kBalanceTol = 1e-9;

std::vector<Count> project(const Complex& y, const std::vector<std::size_t>& onto) {
    std::vector<Count> out(onto.size(), 0);
    for (std::size_t j = 0; j < onto.size(); ++j) out[j] = y.coefficient(onto[j]);
    return out;
}

double factorial_product(const std::vector<Count>& y) {
    double out = 1.0;
    for (Count c : y)
        for (Count j = 2; j <= c; ++j) out *= static_cast<double>(j);
    return out;
}

double falling_power(double v, Count k) {
    double out = 1.0;
    for (Count j = 0; j < k; ++j) out *= v - static_cast<double>(j);
    return out;
}

double power_product(std::span<const double> q, const std::vector<Count>& y) {
    double out = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] != 0) out *= std::pow(q[i], static_cast<double>(y[i]));
    return out;
}

// Groups base reactions by their projection onto `onto`; trivial projections
// are dropped. Reduced reactions and complexes keep first-appearance order.
void group_projections(const ReactionNetwork& net, const std::vector<std::size_t>& reactions,
                       const std::vector<std::size_t>& onto, std::vector<ReducedReaction>& out,
                       std::vector<std::vector<Count>>& complexes) {
    std::map<std::pair<std::vector<Count>, std::vector<Count>>, std::size_t> seen;
    auto complex_index = [&](const std::vector<Count>& c) {
        const auto it = std::find(complexes.begin(), complexes.end(), c);
        if (it != complexes.end()) return static_cast<std::size_t>(it - complexes.begin());
        complexes.push_back(c);
        return complexes.size() - 1;
    };
    for (std::size_t r : reactions) {
        auto src = project(net.reactions()[r].source, onto);
        auto dst = project(net.reactions()[r].product, onto);
        if (src == dst) continue;
        const auto key = std::make_pair(src, dst);
        const auto it = seen.find(key);
        if (it != seen.end()) {
            out[it->second].preimage.push_back(r);
            continue;
        }
        ReducedReaction red;
        red.source_complex = complex_index(src);
        red.product_complex = complex_index(dst);
        red.source = std::move(src);
        red.product = std::move(dst);
        red.preimage.push_back(r);
        seen.emplace(key, out.size());
        out.push_back(std::move(red));
    }
}

bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

std::vector<std::vector<double>> continuous_probe_grid(std::size_t dimension,
                                                       std::size_t max_points) {
    std::vector<int> alpha(dimension, 1);
    return probe_grid(alpha, 0, max_points);
}

DiscreteReduction::DiscreteReduction(LimitKinetics kinetics) : kinetics_(std::move(kinetics)) {
    const auto& net = kinetics_.network();
    discrete_ = discrete_species(kinetics_.alpha());
    continuous_ = continuous_species(kinetics_.alpha());
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        if (continuous_order(net.reactions()[r].source, kinetics_.alpha()) > 0) fast_.push_back(r);
    }
    group_projections(net, fast_, discrete_, reactions_, complexes_);

    birth_death_only_ = std::all_of(reactions_.begin(), reactions_.end(), [](const auto& k) {
        Count total = 0;
        for (Count c : k.source) total += c;
        for (Count c : k.product) total += c;
        return total == 1;
    });

    // kappa_r(w) v!/(v - y)! must reproduce the limiting rate away from v = y.
    const auto grid = continuous_probe_grid(continuous_.size());
    for (std::size_t r : fast_) {
        const bool mass_action = net.reactions()[r].rate_law.is_mass_action();
        const bool richardson = !mass_action && !net.reactions()[r].rate_law.as_expression().limit;
        const double tol = richardson ? 1e-7 : 1e-9;
        const auto y = project(net.reactions()[r].source, discrete_);
        for (const auto& w : grid) {
            const double k = kappa(r, w);
            if (!(k > 0.0) || !std::isfinite(k)) {
                throw AssumptionViolation("kappa_r(w) of " + describe_reaction(net, r) +
                                          " is not positive at a probe w");
            }
            if (mass_action) continue;
            for (Count shift = 1; shift <= 3; ++shift) {
                std::vector<double> v(y.size());
                double ff = 1.0;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    v[i] = static_cast<double>(y[i] + shift);
                    ff *= falling_power(v[i], y[i]);
                }
                const double actual = kinetics_.rate(r, full_state(v, w));
                if (!close(actual, k * ff, tol)) {
                    throw AssumptionViolation(
                        "rate of " + describe_reaction(net, r) +
                        " does not factor as kappa(w) v!/(v - y)! in the discrete species (at v = y + " +
                        std::to_string(shift) + ": " + std::to_string(actual) + " vs " +
                        std::to_string(k * ff) + ")");
                }
            }
        }
    }

    if (!discrete_.empty() && !reactions_.empty() && !birth_death_only_ && discrete_.size() > 1) {
        std::vector<double> ones(continuous_.size(), 1.0);
        solver_ = std::make_shared<const EquilibriumSolver>(network_at(ones));
    }
}

std::vector<std::string> DiscreteReduction::species_names() const {
    std::vector<std::string> out;
    for (std::size_t i : discrete_) out.push_back(base().species()[i].name);
    return out;
}

std::vector<double> DiscreteReduction::full_state(std::span<const double> v,
                                                  std::span<const double> w) const {
    std::vector<double> x(base().num_species(), 0.0);
    for (std::size_t j = 0; j < discrete_.size(); ++j) x[discrete_[j]] = v[j];
    for (std::size_t j = 0; j < continuous_.size(); ++j) x[continuous_[j]] = w[j];
    return x;
}

double DiscreteReduction::kappa(std::size_t r, std::span<const double> w) const {
    const auto& reaction = base().reactions()[r];
    if (reaction.rate_law.is_mass_action()) {
        double k = reaction.rate_law.kappa();
        for (std::size_t j = 0; j < continuous_.size(); ++j) {
            const Count c = reaction.source.coefficient(continuous_[j]);
            if (c != 0) k *= std::pow(w[j], static_cast<double>(c));
        }
        return k;
    }
    const auto y = project(reaction.source, discrete_);
    std::vector<double> v(y.begin(), y.end());
    return kinetics_.rate(r, full_state(v, w)) / factorial_product(y);
}

std::vector<double> DiscreteReduction::reduced_kappas(std::span<const double> w) const {
    std::vector<double> out;
    out.reserve(reactions_.size());
    for (const auto& k : reactions_) {
        double sum = 0.0;
        for (std::size_t r : k.preimage) sum += kappa(r, w);
        out.push_back(sum);
    }
    return out;
}

double DiscreteReduction::rate(std::size_t k, std::span<const double> v,
                               std::span<const double> w) const {
    const auto x = full_state(v, w);
    double sum = 0.0;
    for (std::size_t r : reactions_[k].preimage) sum += kinetics_.rate(r, x);
    return sum;
}

std::vector<double> DiscreteReduction::balance_residuals(std::span<const double> q,
                                                         std::span<const double> w) const {
    const auto kap = reduced_kappas(w);
    std::vector<double> out(complexes_.size(), 0.0), in(complexes_.size(), 0.0);
    for (std::size_t k = 0; k < reactions_.size(); ++k) {
        const double flux = kap[k] * power_product(q, reactions_[k].source);
        out[reactions_[k].source_complex] += flux;
        in[reactions_[k].product_complex] += flux;
    }
    std::vector<double> res(complexes_.size(), 0.0);
    for (std::size_t c = 0; c < complexes_.size(); ++c) {
        const double big = std::max(out[c], in[c]);
        res[c] = big > 0.0 ? std::abs(out[c] - in[c]) / big : 0.0;
    }
    return res;
}

DiscreteEquilibrium DiscreteReduction::equilibrium(std::span<const double> w) const {
    DiscreteEquilibrium eq;
    const std::size_t n = discrete_.size();
    if (n == 0) {
        eq.found = eq.balanced = true;
        eq.method = "closed-form";
        return eq;
    }
    const auto kap = reduced_kappas(w);
    if (birth_death_only_) {
        eq.method = "closed-form";
        std::vector<double> birth(n, 0.0), death(n, 0.0);
        for (std::size_t k = 0; k < reactions_.size(); ++k) {
            const auto& red = reactions_[k];
            for (std::size_t i = 0; i < n; ++i) {
                if (red.product[i] == 1) birth[i] += kap[k];
                if (red.source[i] == 1) death[i] += kap[k];
            }
        }
        eq.q.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(birth[i] > 0.0) || !(death[i] > 0.0)) {
                eq.diagnostic = base().species()[discrete_[i]].name +
                                " lacks a birth or a death reaction in the discrete reduction";
                return eq;
            }
            eq.q[i] = birth[i] / death[i];
        }
    } else if (n == 1) {
        eq.method = "root";
        auto f = [&](double q) {
            double s = 0.0;
            for (std::size_t k = 0; k < reactions_.size(); ++k) {
                const double xi = static_cast<double>(reactions_[k].product[0] - reactions_[k].source[0]);
                s += xi * kap[k] * std::pow(q, static_cast<double>(reactions_[k].source[0]));
            }
            return s;
        };
        // Scan a log grid for the first sign change, then bracket.
        double lo = 0.0, hi = 0.0, flo = 0.0;
        bool bracketed = false;
        for (int i = 0; i <= 480; ++i) {
            const double q = std::pow(10.0, -12.0 + 0.05 * i);
            const double fq = f(q);
            if (fq == 0.0) {
                lo = hi = q;
                bracketed = true;
                break;
            }
            if (i > 0 && (fq > 0.0) != (flo > 0.0)) {
                hi = q;
                bracketed = true;
                break;
            }
            lo = q;
            flo = fq;
        }
        if (!bracketed) {
            eq.diagnostic = "no positive equilibrium of the discrete reduction";
            return eq;
        }
        double root = lo;
        if (hi != lo) {
            std::uintmax_t iters = 200;
            const auto bracket = boost::math::tools::toms748_solve(
                f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
            root = 0.5 * (bracket.first + bracket.second);
        }
        eq.q = {root};
    } else {
        eq.method = "newton";
        const std::vector<double> anchor(n, 1.0);
        const auto sol = solver_->solve(kap, anchor);
        if (!sol) {
            eq.diagnostic = "no positive equilibrium of the discrete reduction";
            return eq;
        }
        eq.q = sol->concentrations;
    }
    eq.found = true;
    const auto res = balance_residuals(eq.q, w);
    const auto worst = std::max_element(res.begin(), res.end());
    eq.witness_complex = static_cast<std::size_t>(worst - res.begin());
    eq.residual = *worst;
    eq.balanced = eq.residual <= kBalanceTol;
    if (!eq.balanced) eq.diagnostic = "equilibrium of the discrete reduction is not complex balanced";
    return eq;
}

ReactionNetwork DiscreteReduction::network_at(std::span<const double> w) const {
    if (reactions_.empty()) throw AssumptionViolation("the discrete reduction has no reactions");
    const auto kap = reduced_kappas(w);
    std::vector<ReactionSpec> specs;
    for (std::size_t k = 0; k < reactions_.size(); ++k) {
        specs.push_back({Complex::from_dense(reactions_[k].source),
                         Complex::from_dense(reactions_[k].product),
                         MassActionLaw{kap[k], make_number(kap[k])}});
    }
    return ReactionNetwork::create(species_names(), std::move(specs), {}, true);
}

ContinuousReduction::ContinuousReduction(DiscreteReduction discrete, DiscreteAveraging mode)
    : discrete_(std::move(discrete)), mode_(mode) {
    group_projections(discrete_.base(), discrete_.fast_reactions(), discrete_.continuous(),
                      reactions_, complexes_);
    if (mode_ == DiscreteAveraging::Stationary) {
        if (discrete_.species().size() > 2) {
            throw ConfigError("stationary averaging supports at most two discrete species");
        }
        return;
    }
    for (const auto& w : continuous_probe_grid(discrete_.continuous().size(), 27)) {
        const auto eq = discrete_.equilibrium(w);
        if (!eq.found || !eq.balanced) {
            std::string where;
            for (double x : w) where += (where.empty() ? "" : ", ") + format_number(x);
            throw AssumptionViolation("q_d^w certification failed at w = (" + where + "): " +
                                      eq.diagnostic);
        }
    }
}

std::vector<std::string> ContinuousReduction::species_names() const {
    std::vector<std::string> out;
    for (std::size_t i : discrete_.continuous()) out.push_back(discrete_.base().species()[i].name);
    return out;
}

std::vector<double> ContinuousReduction::discrete_factors(std::span<const double> w) const {
    const auto& net = discrete_.base();
    const auto& fast = discrete_.fast_reactions();
    std::vector<double> out(fast.size(), 1.0);
    if (discrete_.species().empty()) return out;
    if (mode_ == DiscreteAveraging::ProductForm) {
        const auto eq = discrete_.equilibrium(w);
        if (!eq.found || !eq.balanced) {
            throw AssumptionViolation("q_d^w certification failed along the reduced solution: " +
                                      eq.diagnostic);
        }
        for (std::size_t j = 0; j < fast.size(); ++j) {
            out[j] = power_product(eq.q, project(net.reactions()[fast[j]].source, discrete_.species()));
        }
        return out;
    }
    const auto mu = truncated_stationary(discrete_.network_at(w));
    for (std::size_t j = 0; j < fast.size(); ++j) {
        out[j] = mu.falling_factorial_moment(
            project(net.reactions()[fast[j]].source, discrete_.species()));
    }
    return out;
}

std::vector<double> ContinuousReduction::rates(std::span<const double> w) const {
    std::vector<double> out(reactions_.size(), 0.0);
    if (std::any_of(w.begin(), w.end(), [](double x) { return !(x > 0.0); })) return out;
    const auto factors = discrete_factors(w);
    const auto& fast = discrete_.fast_reactions();
    for (std::size_t k = 0; k < reactions_.size(); ++k) {
        for (std::size_t r : reactions_[k].preimage) {
            const auto j = static_cast<std::size_t>(std::find(fast.begin(), fast.end(), r) - fast.begin());
            out[k] += discrete_.kappa(r, w) * factors[j];
        }
    }
    return out;
}

OdeRhs ContinuousReduction::rhs() const {
    auto self = std::make_shared<const ContinuousReduction>(*this);
    return [self](double, std::span<const double> z, std::span<double> dz) {
        std::fill(dz.begin(), dz.end(), 0.0);
        const auto lambda = self->rates(z);
        for (std::size_t k = 0; k < self->reactions_.size(); ++k) {
            const auto& red = self->reactions_[k];
            for (std::size_t i = 0; i < dz.size(); ++i) {
                dz[i] += static_cast<double>(red.product[i] - red.source[i]) * lambda[k];
            }
        }
    };
}

std::vector<double> ContinuousReduction::initial_state(std::span<const double> x0) const {
    std::vector<double> z;
    for (std::size_t i : discrete_.continuous()) z.push_back(x0[i]);
    return z;
}

}  // namespace acr
