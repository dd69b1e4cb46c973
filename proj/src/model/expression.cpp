#include "acr/model/expression.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace acr {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

int precedence(ExprKind k) {
    switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
        return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
        return 2;
    case ExprKind::Neg:
        return 3;
    case ExprKind::Pow:
        return 4;
    default:
        return 5;
    }
}

const char* op_text(ExprKind k) {
    switch (k) {
    case ExprKind::Add: return " + ";
    case ExprKind::Sub: return " - ";
    case ExprKind::Mul: return " * ";
    case ExprKind::Div: return " / ";
    default: return "?";
    }
}

double ipow(double base, int exponent) {
    if (exponent < 0) return 1.0 / ipow(base, -exponent);
    double result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

void collect(const Expr& e, std::vector<std::size_t>& out) {
    if (e.kind == ExprKind::Variable) out.push_back(e.index);
    if (e.lhs) collect(*e.lhs, out);
    if (e.rhs) collect(*e.rhs, out);
}

}  // namespace

ExprPtr make_number(double v) {
    Expr e;
    e.kind = ExprKind::Number;
    e.value = v;
    return make(std::move(e));
}

ExprPtr make_constant(std::string name, std::size_t slot, double value) {
    Expr e;
    e.kind = ExprKind::Constant;
    e.name = std::move(name);
    e.index = slot;
    e.value = value;
    return make(std::move(e));
}

ExprPtr make_variable(std::string species, std::size_t index) {
    Expr e;
    e.kind = ExprKind::Variable;
    e.name = std::move(species);
    e.index = index;
    return make(std::move(e));
}

ExprPtr make_neg(ExprPtr operand) {
    Expr e;
    e.kind = ExprKind::Neg;
    e.lhs = std::move(operand);
    return make(std::move(e));
}

ExprPtr make_binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs) {
    Expr e;
    e.kind = kind;
    e.lhs = std::move(lhs);
    e.rhs = std::move(rhs);
    return make(std::move(e));
}

ExprPtr make_pow(ExprPtr base, int exponent) {
    Expr e;
    e.kind = ExprKind::Pow;
    e.lhs = std::move(base);
    e.exponent = exponent;
    return make(std::move(e));
}

double evaluate(const Expr& e, std::span<const double> vars) {
    switch (e.kind) {
    case ExprKind::Number:
    case ExprKind::Constant:
        return e.value;
    case ExprKind::Variable:
        return vars[e.index];
    case ExprKind::Neg:
        return -evaluate(*e.lhs, vars);
    case ExprKind::Add:
        return evaluate(*e.lhs, vars) + evaluate(*e.rhs, vars);
    case ExprKind::Sub:
        return evaluate(*e.lhs, vars) - evaluate(*e.rhs, vars);
    case ExprKind::Mul:
        return evaluate(*e.lhs, vars) * evaluate(*e.rhs, vars);
    case ExprKind::Div:
        return evaluate(*e.lhs, vars) / evaluate(*e.rhs, vars);
    case ExprKind::Pow:
        return ipow(evaluate(*e.lhs, vars), e.exponent);
    }
    return 0.0;
}

bool is_constant_expr(const Expr& e) {
    if (e.kind == ExprKind::Variable) return false;
    if (e.lhs && !is_constant_expr(*e.lhs)) return false;
    if (e.rhs && !is_constant_expr(*e.rhs)) return false;
    return true;
}

std::vector<std::size_t> referenced_species(const Expr& e) {
    std::vector<std::size_t> out;
    collect(e, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::Number:
        return a.value == b.value;
    case ExprKind::Constant:
        return a.name == b.name && a.value == b.value;
    case ExprKind::Variable:
        return a.name == b.name && a.index == b.index;
    case ExprKind::Neg:
        return structurally_equal(*a.lhs, *b.lhs);
    case ExprKind::Pow:
        return a.exponent == b.exponent && structurally_equal(*a.lhs, *b.lhs);
    default:
        return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), ptr);
}

std::string to_dsl(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Number:
        return format_number(e.value);
    case ExprKind::Constant:
        return e.name;
    case ExprKind::Variable:
        return "x[" + e.name + "]";
    case ExprKind::Neg: {
        std::string inner = to_dsl(*e.lhs);
        if (precedence(e.lhs->kind) < precedence(ExprKind::Neg)) inner = "(" + inner + ")";
        return "-" + inner;
    }
    case ExprKind::Pow: {
        std::string base = to_dsl(*e.lhs);
        if (precedence(e.lhs->kind) <= precedence(ExprKind::Pow)) base = "(" + base + ")";
        return base + "^" + std::to_string(e.exponent);
    }
    default: {
        const int p = precedence(e.kind);
        std::string l = to_dsl(*e.lhs);
        std::string r = to_dsl(*e.rhs);
        if (precedence(e.lhs->kind) < p) l = "(" + l + ")";
        // left-associative grammar: an equal-precedence right child needs parentheses
        if (precedence(e.rhs->kind) <= p) r = "(" + r + ")";
        return l + op_text(e.kind) + r;
    }
    }
}

CompiledExpr::CompiledExpr(const Expr& e) {
    emit(e);
    std::size_t depth = 0;
    for (const auto& in : code_) {
        switch (in.op) {
        case Op::Push:
        case Op::Load:
            ++depth;
            break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
            --depth;
            break;
        default:
            break;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

void CompiledExpr::emit(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Number:
    case ExprKind::Constant:
        code_.push_back({Op::Push, 0, 0, e.value});
        return;
    case ExprKind::Variable:
        code_.push_back({Op::Load, 0, e.index, 0.0});
        return;
    case ExprKind::Neg:
        emit(*e.lhs);
        code_.push_back({Op::Neg, 0, 0, 0.0});
        return;
    case ExprKind::Pow:
        emit(*e.lhs);
        code_.push_back({Op::Pow, e.exponent, 0, 0.0});
        return;
    default:
        emit(*e.lhs);
        emit(*e.rhs);
        Op op = Op::Add;
        if (e.kind == ExprKind::Sub) op = Op::Sub;
        if (e.kind == ExprKind::Mul) op = Op::Mul;
        if (e.kind == ExprKind::Div) op = Op::Div;
        code_.push_back({op, 0, 0, 0.0});
        return;
    }
}

template <class Loader>
double CompiledExpr::run(Loader&& load) const {
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> small;
    std::vector<double> big;
    double* stack = small.data();
    if (max_depth_ > kInline) {
        big.resize(max_depth_);
        stack = big.data();
    }
    std::size_t top = 0;
    for (const auto& in : code_) {
        switch (in.op) {
        case Op::Push: stack[top++] = in.value; break;
        case Op::Load: stack[top++] = load(in.index); break;
        case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::Add: --top; stack[top - 1] += stack[top]; break;
        case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::Div: --top; stack[top - 1] /= stack[top]; break;
        case Op::Pow: stack[top - 1] = ipow(stack[top - 1], in.exponent); break;
        }
    }
    return top ? stack[0] : 0.0;
}

double CompiledExpr::operator()(std::span<const double> vars) const {
    return run([&](std::size_t i) { return vars[i]; });
}

double CompiledExpr::operator()(std::span<const long long> counts) const {
    return run([&](std::size_t i) { return static_cast<double>(counts[i]); });
}

}  // namespace acr
