#pragma once

// Reference laws for the discrete species: product-form Poisson and tabulated
// laws (truncated stationary distributions of non-balanced reductions).

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "acr/model/network.hpp"

namespace acr {

double poisson_pmf(Count k, double mean);

class Reference {
public:
    virtual ~Reference() = default;
    virtual std::size_t dimension() const = 0;
    virtual double pmf(std::span<const Count> v) const = 0;
    virtual std::vector<double> means() const = 0;
    /// States carrying all but a negligible part of the mass, in lexicographic
    /// order; empty when the support is too large to enumerate.
    virtual std::vector<std::vector<Count>> support() const = 0;
};

/// Independent Poisson coordinates with the given means.
class PoissonReference : public Reference {
public:
    explicit PoissonReference(std::vector<double> means);

    std::size_t dimension() const override { return means_.size(); }
    double pmf(std::span<const Count> v) const override;
    std::vector<double> means() const override { return means_; }
    std::vector<std::vector<Count>> support() const override;

    /// floor(mean + 12 sqrt(mean) + 20).
    Count truncation(std::size_t i) const;
    /// pmf of coordinate i over 0..truncation(i).
    std::vector<double> marginal_pmf(std::size_t i) const;

private:
    std::vector<double> means_;
};

class TabularReference : public Reference {
public:
    TabularReference(std::vector<std::vector<Count>> states, std::vector<double> probabilities);

    std::size_t dimension() const override { return dim_; }
    double pmf(std::span<const Count> v) const override;
    std::vector<double> means() const override;
    std::vector<std::vector<Count>> support() const override;

private:
    std::size_t dim_ = 0;
    std::map<std::vector<Count>, double> table_;
};

}  // namespace acr
