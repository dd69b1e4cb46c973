#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "acr/model/parser.hpp"
#include "acr/model/rates.hpp"
#include "acr/util/error.hpp"

using namespace acr;

namespace {

const char* kSimple = "let k1 = 1;\nlet k2 = 2;\nA + B -> 2B @ ma(k1)\nB -> A @ ma(k2)\n";

std::vector<std::string> complex_names(const ReactionNetwork& net) {
    std::vector<std::string> out;
    for (const auto& c : net.complexes()) out.push_back(net.complex_to_string(c));
    return out;
}

}  // namespace

TEST_CASE("parser builds species, complexes and reactions in first-appearance order") {
    const auto net = parse_network(kSimple);
    REQUIRE(net.num_species() == 2);
    CHECK(net.species()[0].name == "A");
    CHECK(net.species()[1].name == "B");
    CHECK(complex_names(net) == std::vector<std::string>{"A + B", "2B", "B", "A"});
    REQUIRE(net.num_reactions() == 2);
    CHECK(net.reactions()[0].rate_law.kappa() == 1.0);
    CHECK(net.reactions()[1].rate_law.kappa() == 2.0);
    CHECK(net.reactions()[0].reaction_vector == std::vector<Count>{-1, 1});
    CHECK(net.reactions()[1].reaction_vector == std::vector<Count>{1, -1});
}

TEST_CASE("reversible arrows expand to two reactions and share complexes") {
    const auto net = parse_network("B <-> C @ ma(1, 2.5)\nC -> 0 @ ma(3)\n");
    REQUIRE(net.num_reactions() == 3);
    CHECK(net.complexes().size() == 3);
    CHECK(net.reactions()[1].source == net.reactions()[0].product);
    CHECK(net.reactions()[1].rate_law.kappa() == 2.5);
    CHECK(net.complex_to_string(net.reactions()[2].product) == "0");
}

TEST_CASE("identical source and product is rejected") {
    CHECK_THROWS_AS(parse_network("A -> A @ ma(1)"), ParseError);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_network("A -> B @ ma(1)\nA -> @ ma(2)\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 6);
    }
    try {
        parse_network("A -> B @ ma(1)\n\nA -> B @ expr(x[Q])\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("unknown species 'Q'") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_network("A -> B @ ma(0)"), ParseError);
    CHECK_THROWS_AS(parse_network("A -> B @ ma(-1)"), ParseError);
    CHECK_THROWS_AS(parse_network("A -> B @ ma(k)"), ParseError);
    CHECK_THROWS_AS(parse_network("A <-> B @ ma(1)"), ParseError);
    CHECK_THROWS_AS(parse_network("# only a comment\n"), ParseError);
}

TEST_CASE("expression rate law evaluates the self-inhibition example") {
    const auto net = parse_network(
        "let k0 = 1;\nA + 2B -> 3B @ expr(k0 * x[A] * x[B] * (x[B]-1) / (1 + x[B]))\n"
        "B <-> C @ ma(1, 1)\n");
    REQUIRE(!net.reactions()[0].rate_law.is_mass_action());
    const std::vector<Count> x{1, 3, 0};
    CHECK(evaluate_rate(net, 0, x) == doctest::Approx(1.5).epsilon(1e-15));
    // guard x >= y fails: only one B
    const std::vector<Count> low{1, 1, 0};
    CHECK(evaluate_rate(net, 0, low) == 0.0);
}

TEST_CASE("stochastic mass action uses falling factorials") {
    const auto net = parse_network(kSimple);
    const std::vector<Count> x{2, 3};
    CHECK(evaluate_rate(net, 0, x) == 6.0);
    const std::vector<Count> zero{0, 0};
    CHECK(evaluate_rate(net, 0, zero) == 0.0);
    CHECK(evaluate_rate(net, 1, zero) == 0.0);

    const auto dimer = parse_network("2A -> 0 @ ma(3)");
    const std::vector<Count> five{5};
    CHECK(evaluate_rate(dimer, 0, five) == 60.0);
    CHECK_THROWS_AS(falling_factorial(4'000'000'000LL, 3), EvaluationError);
}

TEST_CASE("deterministic mass action uses monomials with 0^0 = 1") {
    const auto net = parse_network(kSimple);
    const std::vector<double> z{0.5, 2.0};
    CHECK(evaluate_deterministic_rate(net, 0, z) == doctest::Approx(1.0));
    const auto dimer = parse_network("2A -> B @ ma(3)\n0 -> A @ ma(0.7)\n");
    const std::vector<double> z2{2.0, 0.0};
    CHECK(evaluate_deterministic_rate(dimer, 0, z2) == doctest::Approx(12.0));
    CHECK(evaluate_deterministic_rate(dimer, 1, z2) == doctest::Approx(0.7));
    const std::vector<double> z3{0.0, 0.0};
    CHECK(evaluate_deterministic_rate(dimer, 1, z3) == doctest::Approx(0.7));
}

TEST_CASE("negative expression values are reported with the reaction") {
    const auto net = parse_network("A -> B @ expr(x[A] - 5)");
    const std::vector<Count> x{1, 0};
    try {
        evaluate_rate(net, 0, x);
        FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("A -> B") != std::string::npos);
    }
}

TEST_CASE("print/parse round trip reproduces the network") {
    const std::vector<std::string> docs{
        kSimple,
        "let k0 = 2.5;\nlet k1 = k0 * 2;\nA + 2B -> 3B @ expr(k0 * x[A] * x[B]^2 / (1 + x[B])) scale "
        "N^-1 limit expr(k0 * x[A] * x[B])\nB <-> C @ ma(k1, 0.125)\nC -> 0 @ ma(1e-3)\n",
        "0 -> A @ ma(3)\n2A -> 0 @ ma(1)\n",
        "let a = 1;\nX -> Y @ expr(-(-a) * x[X] / (1 + x[X] * x[X]) - 0)\n",
    };
    for (const auto& doc : docs) {
        const auto first = parse_network(doc);
        const auto printed = print_network(first);
        const auto second = parse_network(printed);
        CHECK(first == second);
        CHECK(print_network(second) == printed);
    }
}

TEST_CASE("reaction vectors are product minus source for random networks") {
    // Deterministic pseudo-random corpus; integer arithmetic must be exact.
    unsigned state = 12345;
    auto next = [&]() {
        state = state * 1103515245u + 12345u;
        return (state >> 16) & 0x7fff;
    };
    const char* names[] = {"A", "B", "C", "D"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string doc;
        for (int r = 0; r < 4; ++r) {
            auto side = [&]() {
                std::string s;
                for (int i = 0; i < 4; ++i) {
                    const unsigned c = next() % 3;
                    if (c == 0) continue;
                    if (!s.empty()) s += " + ";
                    if (c > 1) s += std::to_string(c);
                    s += names[i];
                }
                return s.empty() ? std::string("0") : s;
            };
            const std::string lhs = side();
            std::string rhs = side();
            if (rhs == lhs) rhs = lhs == "0" ? "A" : "0";
            doc += lhs + " -> " + rhs + " @ ma(1)\n";
        }
        const auto net = parse_network(doc);
        for (const auto& r : net.reactions()) {
            for (std::size_t i = 0; i < net.num_species(); ++i) {
                CHECK(r.reaction_vector[i] == r.product.coefficient(i) - r.source.coefficient(i));
            }
            const std::vector<Count> x = r.source.dense(net.num_species());
            CHECK(evaluate_rate(net, static_cast<std::size_t>(&r - net.reactions().data()), x) > 0.0);
        }
        CHECK(parse_network(print_network(net)) == net);
    }
}
