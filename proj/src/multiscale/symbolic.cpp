#include "acr/multiscale/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acr/util/error.hpp"

namespace acr {

namespace {

using Var = RationalForm::Var;
using Group = RationalForm::Group;
using Term = RationalForm::Term;
using Poly = RationalForm::Poly;

int exponent_of(const Term& t, const Var& v) {
    const auto it = t.powers.find(v);
    return it == t.powers.end() ? 0 : it->second;
}

int w_degree(const Term& t) {
    int d = 0;
    for (const auto& [v, e] : t.powers)
        if (v.first == Group::W) d += e;
    return d;
}

// Higher exponent on the earlier variable sorts first within a group.
int lex_compare(const Term& a, const Term& b, bool w_group) {
    std::vector<Var> vars;
    for (const auto& [v, e] : a.powers) vars.push_back(v);
    for (const auto& [v, e] : b.powers) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (const auto& v : vars) {
        if ((v.first == Group::W) != w_group) continue;
        const int ea = exponent_of(a, v), eb = exponent_of(b, v);
        if (ea != eb) return ea > eb ? -1 : 1;
    }
    return 0;
}

bool term_before(const Term& a, const Term& b) {
    const int da = w_degree(a), db = w_degree(b);
    if (da != db) return da < db;
    if (const int c = lex_compare(a, b, true); c != 0) return c < 0;
    return lex_compare(a, b, false) < 0;
}

Poly canonical(Poly p) {
    std::sort(p.begin(), p.end(), [](const Term& a, const Term& b) { return a.powers < b.powers; });
    Poly out;
    for (auto& t : p) {
        if (!out.empty() && out.back().powers == t.powers) {
            out.back().coeff += t.coeff;
        } else {
            out.push_back(std::move(t));
        }
    }
    double scale = 0.0;
    for (const auto& t : out) scale = std::max(scale, std::abs(t.coeff));
    std::erase_if(out, [&](const Term& t) { return std::abs(t.coeff) <= 1e-14 * scale; });
    std::sort(out.begin(), out.end(), term_before);
    return out;
}

Term multiply(const Term& a, const Term& b) {
    Term t{a.coeff * b.coeff, a.powers};
    for (const auto& [v, e] : b.powers) {
        if ((t.powers[v] += e) == 0) t.powers.erase(v);
    }
    return t;
}

Term inverse(const Term& a) {
    Term t{1.0 / a.coeff, {}};
    for (const auto& [v, e] : a.powers) t.powers[v] = -e;
    return t;
}

Poly multiply(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& x : a)
        for (const auto& y : b) out.push_back(multiply(x, y));
    return canonical(std::move(out));
}

Poly scale(const Poly& a, const Term& m) {
    Poly out;
    for (const auto& x : a) out.push_back(multiply(x, m));
    return canonical(std::move(out));
}

bool same_poly(const Poly& a, const Poly& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].powers != b[i].powers) return false;
        if (std::abs(a[i].coeff - b[i].coeff) > 1e-14 * std::abs(b[i].coeff)) return false;
    }
    return true;
}

// Per-variable minimum exponent over the terms (missing variables count 0),
// optionally clipped at zero from above.
Term content(const std::vector<const Poly*>& polys, bool negative_only) {
    std::map<Var, int> lo;
    std::vector<Var> vars;
    for (const Poly* p : polys)
        for (const auto& t : *p)
            for (const auto& [v, e] : t.powers) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    Term m{1.0, {}};
    for (const auto& v : vars) {
        int mn = std::numeric_limits<int>::max();
        for (const Poly* p : polys)
            for (const auto& t : *p) mn = std::min(mn, exponent_of(t, v));
        if (negative_only) mn = std::min(mn, 0);
        if (mn != 0) m.powers[v] = mn;
    }
    return m;
}

std::string term_string(const Term& t, const RationalForm::Names& names, bool with_sign) {
    std::string factors;
    for (const auto& [v, e] : t.powers) {
        if (!factors.empty()) factors += "*";
        factors += names(v);
        if (e != 1) factors += "^" + std::to_string(e);
    }
    const double c = with_sign ? t.coeff : std::abs(t.coeff);
    std::string out;
    if (factors.empty()) {
        out = format_number(c);
    } else if (c == 1.0) {
        out = factors;
    } else if (c == -1.0) {
        out = "-" + factors;
    } else {
        out = format_number(c) + "*" + factors;
    }
    return out;
}

std::string poly_string(const Poly& p, const RationalForm::Names& names) {
    if (p.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i == 0) {
            out = term_string(p[i], names, true);
        } else {
            out += p[i].coeff < 0 ? " - " : " + ";
            out += term_string(p[i], names, false);
        }
    }
    return out;
}

bool needs_parentheses(const Poly& p) {
    if (p.size() != 1) return true;
    const auto& t = p.front();
    return t.powers.size() + (t.coeff != 1.0 ? 1 : 0) > 1;
}

std::string fraction_string(const Poly& num, const Poly& den, const RationalForm::Names& names) {
    std::string n = poly_string(num, names);
    if (num.size() > 1) n = "(" + n + ")";
    std::string d = poly_string(den, names);
    if (needs_parentheses(den)) d = "(" + d + ")";
    return n + "/" + d;
}

using VarMap = std::function<std::optional<RationalForm>(std::size_t species)>;

std::optional<RationalForm> to_form(const Expr& e, const VarMap& species) {
    switch (e.kind) {
        case ExprKind::Number:
            return RationalForm::number(e.value);
        case ExprKind::Constant:
            return RationalForm::variable(Group::Constant, e.index);
        case ExprKind::Variable:
            return species(e.index);
        case ExprKind::Neg: {
            const auto x = to_form(*e.lhs, species);
            if (!x) return std::nullopt;
            return RationalForm::number(-1.0) * *x;
        }
        case ExprKind::Pow: {
            const auto x = to_form(*e.lhs, species);
            if (!x) return std::nullopt;
            if (x->is_zero() && e.exponent < 0) return std::nullopt;
            return x->pow(e.exponent);
        }
        default:
            break;
    }
    const auto a = to_form(*e.lhs, species);
    const auto b = to_form(*e.rhs, species);
    if (!a || !b) return std::nullopt;
    switch (e.kind) {
        case ExprKind::Add:
            return *a + *b;
        case ExprKind::Sub:
            return *a + RationalForm::number(-1.0) * *b;
        case ExprKind::Mul:
            return *a * *b;
        case ExprKind::Div:
            if (b->is_zero()) return std::nullopt;
            return *a / *b;
        default:
            return std::nullopt;
    }
}

std::string complex_label(const std::vector<Count>& v, std::span<const std::string> names) {
    return format_complex(Complex::from_dense(v), names);
}

bool complex_smaller(const std::vector<Count>& a, const std::vector<Count>& b) {
    Count oa = 0, ob = 0;
    for (Count c : a) oa += c;
    for (Count c : b) ob += c;
    if (oa != ob) return oa < ob;
    return a > b;
}

}  // namespace

RationalForm RationalForm::number(double v) {
    RationalForm f;
    if (v != 0.0) f.num_ = {Term{v, {}}};
    return f;
}

RationalForm RationalForm::variable(Group group, std::size_t index) {
    RationalForm f;
    f.num_ = {Term{1.0, {{Var{group, index}, 1}}}};
    return f;
}

void RationalForm::normalize() {
    num_ = canonical(std::move(num_));
    den_ = canonical(std::move(den_));
    if (den_.empty()) throw EvaluationError("division by zero in a symbolic rate");
    if (num_.empty()) {
        den_ = {Term{1.0, {}}};
        return;
    }
    if (den_.size() == 1) {
        num_ = scale(num_, inverse(den_.front()));
        den_ = {Term{1.0, {}}};
        return;
    }
    const Term c = content({&num_, &den_}, false);
    if (!c.powers.empty()) {
        const Term ci = inverse(c);
        num_ = scale(num_, ci);
        den_ = scale(den_, ci);
    }
    // A numerator proportional to the denominator cancels to a number.
    if (num_.size() == den_.size()) {
        const double ratio = num_.front().coeff / den_.front().coeff;
        bool proportional = true;
        for (std::size_t i = 0; i < num_.size() && proportional; ++i) {
            proportional = num_[i].powers == den_[i].powers &&
                           std::abs(num_[i].coeff - ratio * den_[i].coeff) <=
                               1e-14 * std::abs(num_[i].coeff);
        }
        if (proportional) {
            num_ = {Term{ratio, {}}};
            den_ = {Term{1.0, {}}};
        }
    }
}

RationalForm RationalForm::operator+(const RationalForm& o) const {
    RationalForm f;
    if (same_poly(den_, o.den_)) {
        f.num_ = num_;
        f.num_.insert(f.num_.end(), o.num_.begin(), o.num_.end());
        f.den_ = den_;
    } else {
        f.num_ = multiply(num_, o.den_);
        const auto rhs = multiply(o.num_, den_);
        f.num_.insert(f.num_.end(), rhs.begin(), rhs.end());
        f.den_ = multiply(den_, o.den_);
    }
    f.normalize();
    return f;
}

RationalForm RationalForm::operator*(const RationalForm& o) const {
    RationalForm f;
    f.num_ = multiply(num_, o.num_);
    f.den_ = multiply(den_, o.den_);
    f.normalize();
    return f;
}

RationalForm RationalForm::operator/(const RationalForm& o) const {
    if (o.is_zero()) throw EvaluationError("division by zero in a symbolic rate");
    RationalForm f;
    f.num_ = multiply(num_, o.den_);
    f.den_ = multiply(den_, o.num_);
    f.normalize();
    return f;
}

RationalForm RationalForm::pow(int exponent) const {
    RationalForm base = *this;
    if (exponent < 0) {
        base = number(1.0) / base;
        exponent = -exponent;
    }
    RationalForm out = number(1.0);
    for (int i = 0; i < exponent; ++i) out = out * base;
    return out;
}

double RationalForm::evaluate(const std::function<double(const Var&)>& value) const {
    auto eval = [&](const Poly& p) {
        double s = 0.0;
        for (const auto& t : p) {
            double x = t.coeff;
            for (const auto& [v, e] : t.powers) x *= std::pow(value(v), e);
            s += x;
        }
        return s;
    };
    return eval(num_) / eval(den_);
}

std::string RationalForm::str(const Names& names) const {
    if (den_.size() == 1 && den_.front().powers.empty() && den_.front().coeff == 1.0) {
        const Term m = content({&num_}, true);
        if (m.powers.empty()) return poly_string(num_, names);
        const Term mi = inverse(m);
        return fraction_string(scale(num_, mi), {mi}, names);
    }
    return fraction_string(num_, den_, names);
}

std::optional<RationalForm> constant_form(const Expr& e) {
    return to_form(e, [](std::size_t) { return std::optional<RationalForm>{}; });
}

ReductionPrinter::ReductionPrinter(const DiscreteReduction& discrete, DiscreteAveraging mode)
    : discrete_(discrete), mode_(mode) {
    const auto& net = discrete_.base();
    const auto& xd = discrete_.species();
    const auto& xc = discrete_.continuous();
    kappas_.resize(net.num_reactions());
    for (std::size_t r : discrete_.fast_reactions()) kappas_[r] = kappa_form(r);

    const auto names = discrete_.species_names();
    if (mode_ == DiscreteAveraging::ProductForm) {
        const auto grid = continuous_probe_grid(xc.size(), 9);
        std::vector<DiscreteEquilibrium> eqs;
        for (const auto& w : grid) eqs.push_back(discrete_.equilibrium(w));
        const auto& red = discrete_.reactions();
        for (std::size_t i = 0; i < xd.size(); ++i) {
            auto pure = [&](const std::vector<Count>& v, Count n) {
                for (std::size_t j = 0; j < v.size(); ++j)
                    if (v[j] != (j == i ? n : 0)) return false;
                return true;
            };
            auto summed = [&](const ReducedReaction& k) -> std::optional<RationalForm> {
                RationalForm s;
                for (std::size_t r : k.preimage) {
                    if (!kappas_[r]) return std::nullopt;
                    s = s + *kappas_[r];
                }
                return s;
            };
            std::optional<RationalForm> found;
            for (const auto& fwd : red) {
                const Count n = fwd.source[i];
                if (!pure(fwd.source, n) || !pure(fwd.product, n + 1)) continue;
                for (const auto& back : red) {
                    if (back.source != fwd.product || back.product != fwd.source) continue;
                    const auto f = summed(fwd), b = summed(back);
                    if (!f || !b) continue;
                    const auto candidate = *f / *b;
                    bool ok = true;
                    for (std::size_t g = 0; g < grid.size() && ok; ++g) {
                        if (!eqs[g].found || !eqs[g].balanced) {
                            ok = false;
                            break;
                        }
                        const double sym = candidate.evaluate([&](const Var& v) {
                            if (v.first == Group::Constant) return net.constants()[v.second].value;
                            if (v.first == Group::W) return grid[g][v.second];
                            return std::numeric_limits<double>::quiet_NaN();
                        });
                        ok = std::abs(sym - eqs[g].q[i]) <= 1e-8 * std::abs(eqs[g].q[i]);
                    }
                    if (ok) found = candidate;
                    break;
                }
                if (found) break;
            }
            if (found) {
                q_.push_back(*found);
            } else {
                atoms_.push_back("q[" + names[i] + "]");
                q_.push_back(RationalForm::variable(Group::Atom, atoms_.size() - 1));
            }
        }
    }
}

std::string ReductionPrinter::w_name(std::size_t j) const {
    const auto& xc = discrete_.continuous();
    if (xc.size() == 1) return "w";
    return "w[" + discrete_.base().species()[xc[j]].name + "]";
}

std::string ReductionPrinter::format(const std::optional<RationalForm>& f) const {
    if (!f) return "?";
    const auto& net = discrete_.base();
    return f->str([&](const Var& v) -> std::string {
        switch (v.first) {
            case Group::Constant:
                return net.constants()[v.second].name;
            case Group::W:
                return w_name(v.second);
            case Group::Atom:
                return atoms_[v.second];
        }
        return "?";
    });
}

std::optional<RationalForm> ReductionPrinter::kappa_form(std::size_t r) const {
    const auto& net = discrete_.base();
    const auto& xd = discrete_.species();
    const auto& xc = discrete_.continuous();
    const auto& reaction = net.reactions()[r];
    auto w_index = [&](std::size_t s) -> std::optional<std::size_t> {
        const auto it = std::find(xc.begin(), xc.end(), s);
        if (it == xc.end()) return std::nullopt;
        return static_cast<std::size_t>(it - xc.begin());
    };
    if (reaction.rate_law.is_mass_action()) {
        auto f = constant_form(*reaction.rate_law.as_mass_action().constant);
        if (!f) return std::nullopt;
        for (const auto& [s, c] : reaction.source.terms()) {
            if (const auto j = w_index(s)) {
                *f = *f * RationalForm::variable(Group::W, *j).pow(static_cast<int>(c));
            }
        }
        return f;
    }
    const auto& ex = reaction.rate_law.as_expression();
    if (!ex.limit) return std::nullopt;
    double factorial = 1.0;
    for (std::size_t s : xd)
        for (Count j = 2; j <= reaction.source.coefficient(s); ++j) factorial *= static_cast<double>(j);
    // kappa_r(w) = lambda_r(pi_d(y), w) / pi_d(y)!
    auto f = to_form(*ex.limit, [&](std::size_t s) -> std::optional<RationalForm> {
        if (const auto j = w_index(s)) return RationalForm::variable(Group::W, *j);
        return RationalForm::number(static_cast<double>(reaction.source.coefficient(s)));
    });
    if (!f) return std::nullopt;
    return *f / RationalForm::number(factorial);
}

std::vector<std::string> ReductionPrinter::discrete_lines() const {
    const auto& red = discrete_.reactions();
    const std::vector<double> ones(discrete_.continuous().size(), 1.0);
    const auto numeric = discrete_.reduced_kappas(ones);
    std::vector<std::string> rates;
    for (std::size_t k = 0; k < red.size(); ++k) {
        std::optional<RationalForm> s = RationalForm{};
        for (std::size_t r : red[k].preimage) {
            if (!kappas_[r]) {
                s.reset();
                break;
            }
            s = *s + *kappas_[r];
        }
        rates.push_back(s ? format(s) : format_number(numeric[k]) + " at w = 1");
    }
    const auto names = discrete_.species_names();
    return group_reaction_lines(red, names, rates);
}

std::vector<std::string> ReductionPrinter::q_lines() const {
    std::vector<std::string> out;
    if (mode_ != DiscreteAveraging::ProductForm) return out;
    const auto names = discrete_.species_names();
    for (std::size_t i = 0; i < q_.size(); ++i) {
        const std::string value = format(q_[i]);
        if (value != "q[" + names[i] + "]") out.push_back("q[" + names[i] + "] = " + value);
    }
    return out;
}

std::optional<RationalForm> ReductionPrinter::continuous_rate_form(const ReducedReaction& k) const {
    const auto& net = discrete_.base();
    const auto& xd = discrete_.species();
    RationalForm sum;
    for (std::size_t r : k.preimage) {
        if (!kappas_[r]) return std::nullopt;
        RationalForm term = *kappas_[r];
        const auto& src = net.reactions()[r].source;
        if (mode_ == DiscreteAveraging::ProductForm) {
            for (std::size_t i = 0; i < xd.size(); ++i) {
                const Count c = src.coefficient(xd[i]);
                if (c != 0) term = term * q_[i].pow(static_cast<int>(c));
            }
        } else {
            std::string label;
            for (std::size_t i = 0; i < xd.size(); ++i) {
                const auto& name = net.species()[xd[i]].name;
                for (Count j = 0; j < src.coefficient(xd[i]); ++j) {
                    if (!label.empty()) label += "*";
                    label += j == 0 ? name : "(" + name + "-" + std::to_string(j) + ")";
                }
            }
            if (!label.empty()) {
                label = "E[" + label + "]";
                auto it = std::find(atoms_.begin(), atoms_.end(), label);
                if (it == atoms_.end()) {
                    atoms_.push_back(label);
                    it = atoms_.end() - 1;
                }
                term = term * RationalForm::variable(
                                  Group::Atom, static_cast<std::size_t>(it - atoms_.begin()));
            }
        }
        sum = sum + term;
    }
    return sum;
}

std::vector<std::string> ReductionPrinter::continuous_lines(
    const ContinuousReduction& continuous) const {
    const auto& red = continuous.reactions();
    std::vector<std::string> rates;
    std::vector<double> numeric;
    for (std::size_t k = 0; k < red.size(); ++k) {
        const auto f = continuous_rate_form(red[k]);
        if (f) {
            rates.push_back(format(f));
        } else {
            if (numeric.empty()) {
                numeric = continuous.rates(std::vector<double>(continuous.species_names().size(), 1.0));
            }
            rates.push_back(format_number(numeric[k]) + " at w = 1");
        }
    }
    const auto names = continuous.species_names();
    return group_reaction_lines(red, names, rates);
}

std::vector<std::string> group_reaction_lines(const std::vector<ReducedReaction>& reactions,
                                              std::span<const std::string> species,
                                              const std::vector<std::string>& rates) {
    std::vector<std::string> lines;
    std::vector<bool> done(reactions.size(), false);
    for (std::size_t k = 0; k < reactions.size(); ++k) {
        if (done[k]) continue;
        done[k] = true;
        const auto& a = reactions[k];
        const auto src = complex_label(a.source, species);
        const auto dst = complex_label(a.product, species);
        bool grouped = false;
        for (std::size_t j = k + 1; j < reactions.size() && !grouped; ++j) {
            if (done[j]) continue;
            const auto& b = reactions[j];
            if (b.source == a.product && b.product == a.source) {
                lines.push_back(src + " <=> " + dst + " [" + rates[k] + "] [" + rates[j] + "]");
                done[j] = grouped = true;
            }
        }
        for (std::size_t j = k + 1; j < reactions.size() && !grouped; ++j) {
            if (done[j]) continue;
            const auto& b = reactions[j];
            if (b.source == a.source && rates[j] == rates[k]) {
                const bool a_first = complex_smaller(a.product, b.product);
                const auto& left = a_first ? a.product : b.product;
                const auto& right = a_first ? b.product : a.product;
                lines.push_back(complex_label(left, species) + " <- " + src + " -> " +
                                complex_label(right, species) + " [" + rates[k] + "]");
                done[j] = grouped = true;
            }
        }
        if (!grouped) lines.push_back(src + " -> " + dst + " [" + rates[k] + "]");
    }
    return lines;
}

std::string reduction_text(const DiscreteReduction& discrete, const ContinuousReduction* continuous,
                           DiscreteAveraging mode, const std::string& unavailable) {
    const ReductionPrinter printer(discrete, mode);
    auto join = [](const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
        return out.empty() ? std::string("(none)") : out;
    };
    std::string out = "discrete species: " + join(discrete.species_names()) + "\n";
    std::vector<std::string> cont;
    for (std::size_t i : discrete.continuous()) cont.push_back(discrete.base().species()[i].name);
    out += "continuous species: " + join(cont) + "\n";
    out += "S_d^w:\n";
    for (const auto& line : printer.discrete_lines()) out += "  " + line + "\n";
    const auto q = printer.q_lines();
    if (!q.empty()) {
        out += "q_d^w:\n";
        for (const auto& line : q) out += "  " + line + "\n";
    }
    out += mode == DiscreteAveraging::ProductForm ? "S_c:\n" : "S_c (stationary averages):\n";
    if (continuous) {
        for (const auto& line : printer.continuous_lines(*continuous)) out += "  " + line + "\n";
    } else {
        out += "  unavailable: " + unavailable + "\n";
    }
    return out;
}

}  // namespace acr
