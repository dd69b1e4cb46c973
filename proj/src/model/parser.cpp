#include "acr/model/parser.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "acr/util/error.hpp"

namespace acr {

namespace {

enum class Tok {
    Ident, Number, Arrow, RevArrow, At, LParen, RParen, LBracket, RBracket,
    Plus, Minus, Star, Slash, Caret, Comma, Semicolon, Equals, Newline, End
};

struct Token {
    Tok type = Tok::End;
    std::string text;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blanks();
            Token t;
            t.line = line_;
            t.column = column_;
            if (pos_ >= text_.size()) {
                t.type = Tok::End;
                out.push_back(t);
                return out;
            }
            const char c = text_[pos_];
            if (c == '\n') {
                advance();
                t.type = Tok::Newline;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.type = Tok::Ident;
                while (pos_ < text_.size() &&
                       (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                    t.text += text_[pos_];
                    advance();
                }
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && pos_ + 1 < text_.size() &&
                        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
                t.type = Tok::Number;
                t.text = lex_number();
            } else if (starts_with("<->")) {
                t.type = Tok::RevArrow;
                advance(3);
            } else if (starts_with("->")) {
                t.type = Tok::Arrow;
                advance(2);
            } else {
                switch (c) {
                case '@': t.type = Tok::At; break;
                case '(': t.type = Tok::LParen; break;
                case ')': t.type = Tok::RParen; break;
                case '[': t.type = Tok::LBracket; break;
                case ']': t.type = Tok::RBracket; break;
                case '+': t.type = Tok::Plus; break;
                case '-': t.type = Tok::Minus; break;
                case '*': t.type = Tok::Star; break;
                case '/': t.type = Tok::Slash; break;
                case '^': t.type = Tok::Caret; break;
                case ',': t.type = Tok::Comma; break;
                case ';': t.type = Tok::Semicolon; break;
                case '=': t.type = Tok::Equals; break;
                default:
                    throw ParseError(line_, column_, std::string("unexpected character '") + c + "'");
                }
                t.text = std::string(1, c);
                advance();
            }
            out.push_back(std::move(t));
        }
    }

private:
    bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
            ++pos_;
        }
    }

    void skip_blanks() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else {
                return;
            }
        }
    }

    bool digit_at(std::size_t p) const {
        return p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]));
    }

    std::string lex_number() {
        std::string s;
        while (digit_at(pos_)) { s += text_[pos_]; advance(); }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            s += '.';
            advance();
            while (digit_at(pos_)) { s += text_[pos_]; advance(); }
        }
        // only treat e/E as an exponent when digits follow, so `2e` stays coefficient 2 of species e
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (digit_at(p)) {
                while (pos_ < p) { s += text_[pos_]; advance(); }
                while (digit_at(pos_)) { s += text_[pos_]; advance(); }
            }
        }
        return s;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

struct VarRef {
    std::string name;
    int line;
    int column;
};

struct PendingRate {
    bool mass_action = true;
    double kappa = 0.0;
    ExprPtr constant;
    ExprPtr body;
    ExprPtr limit;
    std::optional<int> scale_power;
    int line = 0;
    int column = 0;
};

struct PendingTerm {
    Count coeff;
    std::string species;
};

struct PendingReaction {
    std::vector<PendingTerm> source;
    std::vector<PendingTerm> product;
    PendingRate rate;
    int line = 0;
    int column = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ReactionNetwork parse() {
        while (peek().type != Tok::End) {
            if (peek().type == Tok::Newline) {
                ++pos_;
                continue;
            }
            if (peek().type == Tok::Ident && peek().text == "let") {
                parse_let();
            } else {
                parse_reaction_line();
            }
            if (peek().type != Tok::Newline && peek().type != Tok::End) {
                fail(peek(), "expected end of line");
            }
        }
        if (pending_.empty()) throw ParseError(1, 1, "document contains no reactions");
        return assemble();
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw ParseError(t.line, t.column, msg);
    }
    const Token& expect(Tok type, const char* what) {
        if (peek().type != type) {
            fail(peek(), std::string("expected ") + what + describe(peek()));
        }
        return next();
    }
    static std::string describe(const Token& t) {
        if (t.type == Tok::Newline) return ", found end of line";
        if (t.type == Tok::End) return ", found end of input";
        return ", found '" + t.text + "'";
    }
    bool accept(Tok type) {
        if (peek().type != type) return false;
        next();
        return true;
    }
    bool accept_word(const char* word) {
        if (peek().type == Tok::Ident && peek().text == word) {
            next();
            return true;
        }
        return false;
    }

    void parse_let() {
        next();
        const Token& name = expect(Tok::Ident, "constant name");
        if (constants_.count(name.text)) fail(name, "constant '" + name.text + "' redefined");
        expect(Tok::Equals, "'='");
        ExprPtr e = parse_expr(false);
        accept(Tok::Semicolon);
        const double v = evaluate(*e, {});
        if (!std::isfinite(v)) fail(name, "constant '" + name.text + "' is not finite");
        constants_[name.text] = {constant_order_.size(), v};
        constant_order_.push_back(NamedConstant{name.text, v});
    }

    std::vector<PendingTerm> parse_complex() {
        std::vector<PendingTerm> terms;
        if (peek().type == Tok::Number && peek().text == "0" && peek(1).type != Tok::Ident) {
            next();
            return terms;
        }
        while (true) {
            Count coeff = 1;
            if (peek().type == Tok::Number) {
                const Token& num = next();
                if (num.text.find_first_not_of("0123456789") != std::string::npos) {
                    fail(num, "stoichiometric coefficient must be a non-negative integer");
                }
                coeff = std::stoll(num.text);
                if (coeff <= 0) fail(num, "stoichiometric coefficient must be positive");
            }
            const Token& sp = expect(Tok::Ident, "species name");
            terms.push_back({coeff, sp.text});
            if (!accept(Tok::Plus)) break;
        }
        return terms;
    }

    PendingRate parse_expr_rate() {
        PendingRate rate;
        rate.line = peek().line;
        rate.column = peek().column;
        rate.mass_action = false;
        next();  // expr
        expect(Tok::LParen, "'('");
        rate.body = parse_expr(true);
        expect(Tok::RParen, "')'");
        if (accept_word("scale")) {
            const Token& n = expect(Tok::Ident, "'N'");
            if (n.text != "N") fail(n, "scale annotation must read 'scale N^p'");
            expect(Tok::Caret, "'^'");
            bool negative = accept(Tok::Minus);
            const Token& p = expect(Tok::Number, "integer exponent");
            if (p.text.find_first_not_of("0123456789") != std::string::npos) {
                fail(p, "scale exponent must be an integer");
            }
            rate.scale_power = (negative ? -1 : 1) * std::stoi(p.text);
        }
        if (accept_word("limit")) {
            if (!(peek().type == Tok::Ident && peek().text == "expr")) {
                fail(peek(), "expected 'expr(' after 'limit'");
            }
            next();
            expect(Tok::LParen, "'('");
            rate.limit = parse_expr(true);
            expect(Tok::RParen, "')'");
        }
        return rate;
    }

    PendingRate make_mass_action(ExprPtr constant, const Token& at) {
        PendingRate rate;
        rate.line = at.line;
        rate.column = at.column;
        rate.kappa = evaluate(*constant, {});
        if (!(rate.kappa > 0.0) || !std::isfinite(rate.kappa)) {
            fail(at, "mass-action rate constant must be positive, got " + format_number(rate.kappa));
        }
        rate.constant = std::move(constant);
        return rate;
    }

    std::vector<PendingRate> parse_rates() {
        std::vector<PendingRate> rates;
        while (true) {
            const Token& head = peek();
            if (head.type == Tok::Ident && head.text == "ma") {
                next();
                expect(Tok::LParen, "'('");
                while (true) {
                    const Token& at = peek();
                    rates.push_back(make_mass_action(parse_expr(false), at));
                    if (!accept(Tok::Comma)) break;
                }
                expect(Tok::RParen, "')'");
            } else if (head.type == Tok::Ident && head.text == "expr") {
                rates.push_back(parse_expr_rate());
            } else {
                fail(head, "expected rate law 'ma(...)' or 'expr(...)'" + describe(head));
            }
            if (!accept(Tok::Comma)) break;
        }
        return rates;
    }

    void parse_reaction_line() {
        const Token& start = peek();
        auto source = parse_complex();
        bool reversible = false;
        if (accept(Tok::RevArrow)) {
            reversible = true;
        } else {
            expect(Tok::Arrow, "'->' or '<->'");
        }
        auto product = parse_complex();
        const Token& at = expect(Tok::At, "'@' before the rate law");
        auto rates = parse_rates();
        const std::size_t want = reversible ? 2 : 1;
        if (rates.size() != want) {
            fail(at, reversible ? "'<->' needs two rate laws (forward, backward)"
                                : "'->' needs exactly one rate law");
        }
        pending_.push_back({source, product, rates[0], start.line, start.column});
        if (reversible) pending_.push_back({product, source, rates[1], start.line, start.column});
    }

    // Expression grammar (left-associative):
    //   expr := term (('+'|'-') term)*
    //   term := unary (('*'|'/') unary)*
    //   unary := '-' unary | power
    //   power := atom ('^' ['-'] INT)?
    //   atom := NUMBER | IDENT | 'x' '[' IDENT ']' | '(' expr ')'
    ExprPtr parse_expr(bool allow_vars) {
        ExprPtr lhs = parse_term(allow_vars);
        while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
            const ExprKind k = next().type == Tok::Plus ? ExprKind::Add : ExprKind::Sub;
            lhs = make_binary(k, lhs, parse_term(allow_vars));
        }
        return lhs;
    }

    ExprPtr parse_term(bool allow_vars) {
        ExprPtr lhs = parse_unary(allow_vars);
        while (peek().type == Tok::Star || peek().type == Tok::Slash) {
            const ExprKind k = next().type == Tok::Star ? ExprKind::Mul : ExprKind::Div;
            lhs = make_binary(k, lhs, parse_unary(allow_vars));
        }
        return lhs;
    }

    ExprPtr parse_unary(bool allow_vars) {
        if (accept(Tok::Minus)) return make_neg(parse_unary(allow_vars));
        ExprPtr base = parse_atom(allow_vars);
        if (accept(Tok::Caret)) {
            const bool negative = accept(Tok::Minus);
            const Token& p = expect(Tok::Number, "integer exponent");
            if (p.text.find_first_not_of("0123456789") != std::string::npos) {
                fail(p, "exponents must be integers (rate laws are rational functions)");
            }
            base = make_pow(base, (negative ? -1 : 1) * std::stoi(p.text));
        }
        return base;
    }

    ExprPtr parse_atom(bool allow_vars) {
        const Token& t = peek();
        if (t.type == Tok::Number) {
            next();
            return make_number(std::stod(t.text));
        }
        if (t.type == Tok::LParen) {
            next();
            ExprPtr e = parse_expr(allow_vars);
            expect(Tok::RParen, "')'");
            return e;
        }
        if (t.type == Tok::Ident) {
            if (t.text == "x" && peek(1).type == Tok::LBracket) {
                if (!allow_vars) fail(t, "species variables are not allowed in a constant");
                next();
                next();
                const Token& sp = expect(Tok::Ident, "species name");
                expect(Tok::RBracket, "']'");
                vars_.push_back({sp.text, sp.line, sp.column});
                // index resolved once every reaction line has been read
                return make_variable(sp.text, vars_.size() - 1);
            }
            next();
            auto it = constants_.find(t.text);
            if (it == constants_.end()) fail(t, "unknown constant '" + t.text + "'");
            return make_constant(t.text, it->second.first, it->second.second);
        }
        fail(t, "expected a number, constant, x[Species] or '('" + describe(t));
    }

    ExprPtr resolve(const ExprPtr& e, const std::map<std::string, std::size_t>& species) const {
        if (!e) return e;
        switch (e->kind) {
        case ExprKind::Variable: {
            const VarRef& ref = vars_.at(e->index);
            auto it = species.find(ref.name);
            if (it == species.end()) {
                throw ParseError(ref.line, ref.column,
                                 "unknown species '" + ref.name + "' in rate expression");
            }
            return make_variable(ref.name, it->second);
        }
        case ExprKind::Neg:
            return make_neg(resolve(e->lhs, species));
        case ExprKind::Pow:
            return make_pow(resolve(e->lhs, species), e->exponent);
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div:
            return make_binary(e->kind, resolve(e->lhs, species), resolve(e->rhs, species));
        default:
            return e;
        }
    }

    ReactionNetwork assemble() {
        std::vector<std::string> names;
        std::map<std::string, std::size_t> index;
        auto see = [&](const std::vector<PendingTerm>& terms) {
            for (const auto& t : terms) {
                if (!index.count(t.species)) {
                    index[t.species] = names.size();
                    names.push_back(t.species);
                }
            }
        };
        for (const auto& r : pending_) {
            see(r.source);
            see(r.product);
        }
        auto to_complex = [&](const std::vector<PendingTerm>& terms) {
            std::vector<Complex::Term> out;
            for (const auto& t : terms) out.emplace_back(index.at(t.species), t.coeff);
            return Complex(std::move(out));
        };
        std::vector<ReactionSpec> specs;
        for (const auto& r : pending_) {
            ReactionSpec spec;
            spec.source = to_complex(r.source);
            spec.product = to_complex(r.product);
            if (spec.source == spec.product) {
                throw ParseError(r.line, r.column, "reaction source equals product");
            }
            if (r.rate.mass_action) {
                spec.rate_law = RateLaw(MassActionLaw{r.rate.kappa, r.rate.constant});
            } else {
                spec.rate_law = RateLaw(ExpressionLaw{resolve(r.rate.body, index),
                                                      r.rate.scale_power,
                                                      resolve(r.rate.limit, index)});
            }
            specs.push_back(std::move(spec));
        }
        try {
            return ReactionNetwork::create(names, std::move(specs), constant_order_);
        } catch (const NetworkError& e) {
            throw ParseError(pending_.front().line, 1, e.what());
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::map<std::string, std::pair<std::size_t, double>> constants_;
    std::vector<NamedConstant> constant_order_;
    std::vector<VarRef> vars_;
    std::vector<PendingReaction> pending_;
};

std::string rate_to_dsl(const RateLaw& law) {
    if (law.is_mass_action()) {
        const auto& ma = law.as_mass_action();
        return "ma(" + (ma.constant ? to_dsl(*ma.constant) : format_number(ma.kappa)) + ")";
    }
    const auto& ex = law.as_expression();
    std::string out = "expr(" + to_dsl(*ex.body) + ")";
    if (ex.scale_power) out += " scale N^" + std::to_string(*ex.scale_power);
    if (ex.limit) out += " limit expr(" + to_dsl(*ex.limit) + ")";
    return out;
}

}  // namespace

ReactionNetwork parse_network(std::string_view text) {
    Lexer lexer(text);
    Parser parser(lexer.run());
    return parser.parse();
}

ReactionNetwork parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, "cannot open network file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string print_network(const ReactionNetwork& net) {
    std::string out;
    for (const auto& c : net.constants()) {
        out += "let " + c.name + " = " + format_number(c.value) + ";\n";
    }
    for (const auto& r : net.reactions()) {
        out += net.complex_to_string(r.source) + " -> " + net.complex_to_string(r.product) + " @ " +
               rate_to_dsl(r.rate_law) + "\n";
    }
    return out;
}

}  // namespace acr
