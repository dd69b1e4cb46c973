#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace acr {

enum class ExprKind { Number, Constant, Variable, Neg, Add, Sub, Mul, Div, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Node of a rational-function expression over species counts and named
/// constants. Trees are immutable once built and may be shared freely.
struct Expr {
    ExprKind kind = ExprKind::Number;
    double value = 0.0;     // literal value, or the bound value of a Constant
    std::string name;       // Constant or Variable name
    std::size_t index = 0;  // Constant declaration slot or Variable species index
    int exponent = 0;       // Pow only
    ExprPtr lhs;
    ExprPtr rhs;
};

ExprPtr make_number(double v);
ExprPtr make_constant(std::string name, std::size_t slot, double value);
ExprPtr make_variable(std::string species, std::size_t index);
ExprPtr make_neg(ExprPtr operand);
ExprPtr make_binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_pow(ExprPtr base, int exponent);

/// Evaluates with `vars[i]` bound to the variable of species index i.
double evaluate(const Expr& e, std::span<const double> vars);

/// True when the tree mentions no species variable.
bool is_constant_expr(const Expr& e);

/// Species indices referenced anywhere in the tree (sorted, unique).
std::vector<std::size_t> referenced_species(const Expr& e);

/// Structural equality (same shape, same names, same literal values).
bool structurally_equal(const Expr& a, const Expr& b);

/// Canonical DSL text; variables print as `x[Name]`, constants by name.
std::string to_dsl(const Expr& e);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

/// Postfix program for fast repeated evaluation inside the simulator.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const Expr& e);

    double operator()(std::span<const double> vars) const;
    double operator()(std::span<const long long> counts) const;

    bool empty() const { return code_.empty(); }

private:
    enum class Op : unsigned char { Push, Load, Neg, Add, Sub, Mul, Div, Pow };
    struct Instr {
        Op op;
        int exponent;
        std::size_t index;
        double value;
    };
    void emit(const Expr& e);
    template <class Loader>
    double run(Loader&& load) const;

    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
};

}  // namespace acr
