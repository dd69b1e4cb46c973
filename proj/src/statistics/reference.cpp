#include "acr/statistics/reference.hpp"

#include <cmath>

#include "acr/util/error.hpp"

namespace acr {

namespace {
constexpr std::size_t kMaxSupport = 200'000;
}

double poisson_pmf(Count k, double mean) {
    if (k < 0) return 0.0;
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

PoissonReference::PoissonReference(std::vector<double> means) : means_(std::move(means)) {
    for (double m : means_) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw EvaluationError("Poisson mean must be finite and >= 0");
    }
}

Count PoissonReference::truncation(std::size_t i) const {
    const double m = means_.at(i);
    return static_cast<Count>(std::floor(m + 12.0 * std::sqrt(m) + 20.0));
}

double PoissonReference::pmf(std::span<const Count> v) const {
    double p = 1.0;
    for (std::size_t i = 0; i < means_.size(); ++i) p *= poisson_pmf(v[i], means_[i]);
    return p;
}

std::vector<double> PoissonReference::marginal_pmf(std::size_t i) const {
    std::vector<double> out;
    for (Count k = 0; k <= truncation(i); ++k) out.push_back(poisson_pmf(k, means_[i]));
    return out;
}

std::vector<std::vector<Count>> PoissonReference::support() const {
    std::size_t total = 1;
    for (std::size_t i = 0; i < means_.size(); ++i) {
        total *= static_cast<std::size_t>(truncation(i) + 1);
        if (total > kMaxSupport) return {};
    }
    std::vector<std::vector<Count>> out;
    out.reserve(total);
    std::vector<Count> v(means_.size(), 0);
    while (true) {
        out.push_back(v);
        std::size_t i = v.size();
        while (i > 0) {
            --i;
            if (v[i] < truncation(i)) {
                ++v[i];
                break;
            }
            v[i] = 0;
            if (i == 0) return out;
        }
        if (v.empty()) return out;
    }
}

TabularReference::TabularReference(std::vector<std::vector<Count>> states,
                                   std::vector<double> probabilities) {
    if (states.size() != probabilities.size() || states.empty()) {
        throw EvaluationError("tabular reference: states and probabilities disagree");
    }
    dim_ = states.front().size();
    for (std::size_t i = 0; i < states.size(); ++i) table_[std::move(states[i])] += probabilities[i];
}

double TabularReference::pmf(std::span<const Count> v) const {
    const auto it = table_.find(std::vector<Count>(v.begin(), v.end()));
    return it == table_.end() ? 0.0 : it->second;
}

std::vector<double> TabularReference::means() const {
    std::vector<double> m(dim_, 0.0);
    for (const auto& [s, p] : table_) {
        for (std::size_t i = 0; i < dim_; ++i) m[i] += p * static_cast<double>(s[i]);
    }
    return m;
}

std::vector<std::vector<Count>> TabularReference::support() const {
    std::vector<std::vector<Count>> out;
    out.reserve(table_.size());
    for (const auto& [s, p] : table_) out.push_back(s);
    return out;
}

}  // namespace acr
