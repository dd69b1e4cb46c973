#include "acr/multiscale/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "acr/model/rates.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

constexpr double kProbeN = 1e6;

// x!/(x-k)! in floating point; the scaled checks use counts near 2e6 whose
// falling factorials overflow 64-bit integers for k >= 3.
double falling_factorial_real(double x, Count k) {
    double out = 1.0;
    for (Count j = 0; j < k; ++j) out *= std::max(x - static_cast<double>(j), 0.0);
    return out;
}

bool discrete_guard(const Complex& y, std::span<const int> alpha, std::span<const double> x) {
    for (const auto& [i, c] : y.terms()) {
        if (alpha[i] == 0 && x[i] < static_cast<double>(c)) return false;
    }
    return true;
}

}  // namespace

void validate_scaling(const ReactionNetwork& net, const ScalingSpec& spec) {
    const std::size_t n = net.num_species();
    if (spec.alpha.size() != n) throw ConfigError("scaling must assign alpha to every species");
    if (spec.x0.size() != n) throw ConfigError("X0 must give a value for every species");
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.alpha[i] != 0 && spec.alpha[i] != 1) {
            throw ConfigError("alpha of " + net.species()[i].name + " must be 0 or 1");
        }
        if (!(spec.x0[i] > 0.0) || !std::isfinite(spec.x0[i])) {
            throw ConfigError("X0 of " + net.species()[i].name + " must be positive");
        }
    }
    for (long long N : spec.n_grid) {
        if (N < 1) throw ConfigError("N grid entries must be >= 1");
    }
}

std::vector<int> reaction_betas(const ReactionNetwork& net, std::span<const int> alpha) {
    std::vector<int> betas;
    betas.reserve(net.num_reactions());
    for (const auto& r : net.reactions()) {
        int b = 0;
        for (const auto& [i, c] : r.source.terms()) b = std::max(b, alpha[i]);
        betas.push_back(b);
    }
    return betas;
}

std::vector<std::size_t> discrete_species(std::span<const int> alpha) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (alpha[i] == 0) out.push_back(i);
    return out;
}

std::vector<std::size_t> continuous_species(std::span<const int> alpha) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (alpha[i] == 1) out.push_back(i);
    return out;
}

Count continuous_order(const Complex& y, std::span<const int> alpha) {
    Count k = 0;
    for (const auto& [i, c] : y.terms())
        if (alpha[i] == 1) k += c;
    return k;
}

int mass_action_exponent(const Reaction& r, std::span<const int> alpha) {
    int beta = 0;
    for (const auto& [i, c] : r.source.terms()) beta = std::max(beta, alpha[i]);
    return beta - static_cast<int>(continuous_order(r.source, alpha));
}

ScaledSystem build_scaled_system(const ReactionNetwork& base, const ScalingSpec& spec, long long N) {
    validate_scaling(base, spec);
    if (N < 1) throw ConfigError("N must be >= 1");
    const double dn = static_cast<double>(N);
    std::vector<RateLaw> laws;
    laws.reserve(base.num_reactions());
    for (const auto& r : base.reactions()) {
        if (r.rate_law.is_mass_action()) {
            const auto& ma = r.rate_law.as_mass_action();
            const int e = mass_action_exponent(r, spec.alpha);
            if (e == 0 || N == 1) {
                laws.push_back(r.rate_law);
            } else {
                const double f = std::pow(dn, e);
                laws.push_back(MassActionLaw{
                    ma.kappa * f, make_binary(ExprKind::Mul, ma.constant, make_number(f))});
            }
        } else {
            const auto& ex = r.rate_law.as_expression();
            const int p = ex.scale_power.value_or(0);
            ExpressionLaw scaled = ex;
            if (p != 0 && N != 1) {
                scaled.body = make_binary(ExprKind::Mul, make_number(std::pow(dn, p)), ex.body);
            }
            scaled.scale_power = 0;
            laws.push_back(scaled);
        }
    }
    ScaledSystem sys;
    sys.N = N;
    sys.network = base.with_rate_laws(std::move(laws));
    sys.initial_state.resize(base.num_species());
    for (std::size_t i = 0; i < base.num_species(); ++i) {
        sys.initial_state[i] = spec.alpha[i] == 0
                                   ? static_cast<Count>(std::llround(spec.x0[i]))
                                   : static_cast<Count>(std::floor(dn * spec.x0[i]));
    }
    return sys;
}

LimitKinetics::LimitKinetics(ReactionNetwork base, std::vector<int> alpha)
    : net_(std::move(base)), alpha_(std::move(alpha)) {
    if (alpha_.size() != net_.num_species()) {
        throw ConfigError("scaling must assign alpha to every species");
    }
    betas_ = reaction_betas(net_, alpha_);
}

double LimitKinetics::scaled_rate(std::size_t r, std::span<const double> x, double N) const {
    const auto& reaction = net_.reactions()[r];
    std::vector<double> state(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        state[i] = alpha_[i] == 0 ? std::round(x[i]) : std::floor(N * x[i]);
    }
    for (const auto& [i, c] : reaction.source.terms()) {
        if (state[i] < static_cast<double>(c)) return 0.0;
    }
    double rate = 0.0;
    if (reaction.rate_law.is_mass_action()) {
        rate = reaction.rate_law.kappa() * std::pow(N, mass_action_exponent(reaction, alpha_));
        for (const auto& [i, c] : reaction.source.terms()) rate *= falling_factorial_real(state[i], c);
    } else {
        const auto& ex = reaction.rate_law.as_expression();
        rate = std::pow(N, ex.scale_power.value_or(0)) * evaluate(*ex.body, state);
    }
    return rate * std::pow(N, -betas_[r]);
}

double LimitKinetics::rate(std::size_t r, std::span<const double> x) const {
    const auto& reaction = net_.reactions()[r];
    if (!discrete_guard(reaction.source, alpha_, x)) return 0.0;
    if (reaction.rate_law.is_mass_action()) {
        double rate = reaction.rate_law.kappa();
        for (const auto& [i, c] : reaction.source.terms()) {
            rate *= alpha_[i] == 0 ? falling_factorial_real(std::round(x[i]), c)
                                   : std::pow(x[i], static_cast<double>(c));
        }
        return rate;
    }
    const auto& ex = reaction.rate_law.as_expression();
    if (ex.limit) return evaluate(*ex.limit, x);
    // No declared limit: Richardson extrapolation of the O(1/N) scaled rate.
    return 2.0 * scaled_rate(r, x, 2.0 * kProbeN) - scaled_rate(r, x, kProbeN);
}

std::vector<std::vector<double>> probe_grid(std::span<const int> alpha, int v_max,
                                            std::size_t max_points) {
    const std::size_t n = alpha.size();
    std::vector<std::vector<double>> levels(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0) {
            for (int v = 0; v <= v_max; ++v) levels[i].push_back(v);
        } else {
            levels[i] = {0.5, 1.0, 2.0};
        }
    }
    std::size_t total = 1;
    for (const auto& l : levels) total = std::min<std::size_t>(total * l.size(), 1'000'000'000);
    const std::size_t stride = std::max<std::size_t>(1, (total + max_points - 1) / max_points);
    std::vector<std::vector<double>> grid;
    for (std::size_t k = 0; k < total; k += stride) {
        std::vector<double> x(n);
        std::size_t rest = k;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = levels[i][rest % levels[i].size()];
            rest /= levels[i].size();
        }
        grid.push_back(std::move(x));
    }
    return grid;
}

double scaling_limit_error(const LimitKinetics& kinetics, double N) {
    const auto grid = probe_grid(kinetics.alpha());
    double worst = 0.0;
    for (std::size_t r = 0; r < kinetics.network().num_reactions(); ++r) {
        for (const auto& x : grid) {
            worst = std::max(worst, std::abs(kinetics.scaled_rate(r, x, N) - kinetics.rate(r, x)));
        }
    }
    return worst;
}

void check_expression_scaling(const LimitKinetics& kinetics) {
    const auto& net = kinetics.network();
    const auto grid = probe_grid(kinetics.alpha());
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        const auto& law = net.reactions()[r].rate_law;
        if (law.is_mass_action()) continue;
        const auto& ex = law.as_expression();
        for (const auto& x : grid) {
            const double g = kinetics.scaled_rate(r, x, kProbeN);
            if (!ex.scale_power) {
                const double g2 = kinetics.scaled_rate(r, x, 2.0 * kProbeN);
                if (std::abs(g - g2) > 1e-4 * (1.0 + std::abs(g))) {
                    throw ConfigError("reaction " + describe_reaction(net, r) +
                                      " has an N-dependent rate; declare it with `scale N^p`");
                }
            }
            if (ex.limit) {
                const double limit = kinetics.rate(r, x);
                if (std::abs(g - limit) > 1e-3 * (1.0 + std::abs(limit))) {
                    throw ConfigError("reaction " + describe_reaction(net, r) +
                                      ": declared limit disagrees with N^-beta * rate at N = 1e6 (" +
                                      std::to_string(g) + " vs " + std::to_string(limit) + ")");
                }
            }
        }
    }
}

}  // namespace acr
