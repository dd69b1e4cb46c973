#pragma once

// Printable closed forms of the reduced rates. A RationalForm is a quotient
// of Laurent polynomials in rate constants, continuous concentrations w and
// opaque atoms such as q[A] or E[A*(A-1)].

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "acr/multiscale/reduction.hpp"

namespace acr {

class RationalForm {
public:
    enum class Group { Constant = 0, Atom = 1, W = 2 };
    using Var = std::pair<Group, std::size_t>;
    struct Term {
        double coeff = 0.0;
        std::map<Var, int> powers;
    };
    using Poly = std::vector<Term>;
    /// Print names of the variables a form mentions.
    using Names = std::function<std::string(const Var&)>;

    RationalForm() = default;
    static RationalForm number(double v);
    static RationalForm variable(Group group, std::size_t index);

    RationalForm operator+(const RationalForm& o) const;
    RationalForm operator*(const RationalForm& o) const;
    RationalForm operator/(const RationalForm& o) const;
    RationalForm pow(int exponent) const;

    bool is_zero() const { return num_.empty(); }
    /// NaN when a variable has no value.
    double evaluate(const std::function<double(const Var&)>& value) const;
    std::string str(const Names& names) const;

    const Poly& numerator() const { return num_; }
    const Poly& denominator() const { return den_; }

private:
    void normalize();
    Poly num_;
    Poly den_{Term{1.0, {}}};
};

/// Rate constant expression (numbers and `let` constants) as a form.
std::optional<RationalForm> constant_form(const Expr& e);

/// Symbolic view of both reductions. Rates with no closed form print as the
/// numeric value at w = 1.
class ReductionPrinter {
public:
    ReductionPrinter(const DiscreteReduction& discrete, DiscreteAveraging mode);

    /// Lines of S_d^w, `A <=> 0 [k1*w] [k2*w]`.
    std::vector<std::string> discrete_lines() const;
    /// `A = k2/k1` per discrete species (ProductForm only).
    std::vector<std::string> q_lines() const;
    std::vector<std::string> continuous_lines(const ContinuousReduction& continuous) const;

    std::optional<RationalForm> kappa_form(std::size_t base_reaction) const;
    std::string format(const std::optional<RationalForm>& f) const;

private:
    std::optional<RationalForm> continuous_rate_form(const ReducedReaction& k) const;
    std::string w_name(std::size_t j) const;

    const DiscreteReduction& discrete_;
    DiscreteAveraging mode_;
    std::vector<std::optional<RationalForm>> kappas_;  // by base reaction
    std::vector<RationalForm> q_;                       // by discrete species
    mutable std::vector<std::string> atoms_;
};

/// Groups reduced reactions into display lines: reverse pairs as
/// `y <=> y' [f] [b]`, equal-rate branches from one source as
/// `p1 <- y -> p2 [rate]`, the rest as `y -> y' [rate]`.
std::vector<std::string> group_reaction_lines(const std::vector<ReducedReaction>& reactions,
                                              std::span<const std::string> species,
                                              const std::vector<std::string>& rates);

/// Text block printed by `reduce`: species partition, S_d^w, q_d^w and S_c.
/// A null `continuous` prints `unavailable` in its place.
std::string reduction_text(const DiscreteReduction& discrete, const ContinuousReduction* continuous,
                           DiscreteAveraging mode, const std::string& unavailable = {});

}  // namespace acr
