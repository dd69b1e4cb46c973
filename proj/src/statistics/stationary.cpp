#include "acr/statistics/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "acr/model/rates.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

struct Attempt {
    TruncatedStationary result;
    bool too_large = false;
};

Attempt solve_box(const ReactionNetwork& chain, const std::vector<Count>& start, Count cap,
                  std::size_t max_states) {
    Attempt att;
    auto& out = att.result;
    out.cap = cap;
    const std::size_t n = chain.num_species();
    std::map<std::vector<Count>, std::size_t> index;
    std::deque<std::size_t> queue;
    out.states.push_back(start);
    index.emplace(start, 0);
    queue.push_back(0);

    struct Edge {
        std::size_t from, to;
        double rate;
    };
    std::vector<Edge> edges;
    std::vector<bool> leaky;
    while (!queue.empty()) {
        const std::size_t s = queue.front();
        queue.pop_front();
        if (leaky.size() <= s) leaky.resize(s + 1, false);
        const std::vector<Count> x = out.states[s];
        for (std::size_t r = 0; r < chain.num_reactions(); ++r) {
            const double rate = evaluate_rate(chain, r, x);
            if (rate <= 0.0) continue;
            std::vector<Count> y = x;
            bool inside = true;
            for (std::size_t i = 0; i < n; ++i) {
                y[i] += chain.reactions()[r].reaction_vector[i];
                if (y[i] > cap) inside = false;
            }
            if (!inside) {
                leaky[s] = true;
                continue;
            }
            auto it = index.find(y);
            if (it == index.end()) {
                if (out.states.size() >= max_states) {
                    att.too_large = true;
                    return att;
                }
                it = index.emplace(y, out.states.size()).first;
                out.states.push_back(y);
                queue.push_back(it->second);
            }
            edges.push_back({s, it->second, rate});
        }
    }
    leaky.resize(out.states.size(), false);

    // Q^T mu = 0 with the last balance equation replaced by sum(mu) = 1.
    const auto m = static_cast<Eigen::Index>(out.states.size());
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> exit(out.states.size(), 0.0);
    for (const auto& e : edges) {
        exit[e.from] += e.rate;
        if (static_cast<Eigen::Index>(e.to) != m - 1) {
            trip.emplace_back(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from), e.rate);
        }
    }
    for (Eigen::Index i = 0; i < m - 1; ++i) trip.emplace_back(i, i, -exit[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) trip.emplace_back(m - 1, j, 1.0);
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(m - 1) = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw EvaluationError("truncated generator is singular");
    const Eigen::VectorXd mu = lu.solve(b);

    out.probabilities.resize(out.states.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double p = std::max(mu(i), 0.0);
        out.probabilities[static_cast<std::size_t>(i)] = p;
        total += p;
    }
    for (double& p : out.probabilities) p /= total;

    std::vector<double> flow(out.states.size(), 0.0);
    for (const auto& e : edges) {
        flow[e.to] += out.probabilities[e.from] * e.rate;
        flow[e.from] -= out.probabilities[e.from] * e.rate;
    }
    for (std::size_t s = 0; s < out.states.size(); ++s) {
        if (leaky[s]) {
            out.leakage += out.probabilities[s];
        } else {
            out.generator_residual += std::abs(flow[s]);
        }
    }
    return att;
}

}  // namespace

double TruncatedStationary::expectation(
    const std::function<double(std::span<const Count>)>& g) const {
    double sum = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) sum += probabilities[s] * g(states[s]);
    return sum;
}

double TruncatedStationary::falling_factorial_moment(std::span<const Count> y) const {
    return expectation([&](std::span<const Count> v) {
        double out = 1.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            for (Count j = 0; j < y[i]; ++j) out *= static_cast<double>(v[i] - j);
        return out;
    });
}

double TruncatedStationary::mean(std::size_t species) const {
    return expectation([&](std::span<const Count> v) { return static_cast<double>(v[species]); });
}

double TruncatedStationary::variance(std::size_t species) const {
    const double m = mean(species);
    return expectation([&](std::span<const Count> v) {
        const double d = static_cast<double>(v[species]) - m;
        return d * d;
    });
}

std::vector<double> TruncatedStationary::marginal(std::size_t species) const {
    std::vector<double> pmf(static_cast<std::size_t>(cap) + 1, 0.0);
    for (std::size_t s = 0; s < states.size(); ++s) {
        pmf[static_cast<std::size_t>(states[s][species])] += probabilities[s];
    }
    return pmf;
}

TruncatedStationary truncated_stationary(const ReactionNetwork& chain, std::vector<Count> start,
                                         const StationaryOptions& opt) {
    if (start.empty()) start.assign(chain.num_species(), 0);
    if (start.size() != chain.num_species()) throw EvaluationError("start state length mismatch");
    Count cap = opt.initial_cap;
    for (Count c : start) cap = std::max(cap, 2 * c);
    double last_leakage = 1.0;
    while (cap <= opt.max_cap) {
        auto att = solve_box(chain, start, cap, opt.max_states);
        if (att.too_large) break;
        if (att.result.leakage < opt.leakage_tol) return std::move(att.result);
        last_leakage = att.result.leakage;
        cap *= 2;
    }
    throw EvaluationError("truncated stationary distribution did not converge: leakage " +
                          std::to_string(last_leakage) + " at the cap limit");
}

}  // namespace acr
