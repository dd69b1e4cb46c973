#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "acr/dynamics/ode.hpp"
#include "acr/model/parser.hpp"
#include "acr/model/rates.hpp"
#include "acr/multiscale/audit.hpp"
#include "acr/multiscale/reduction.hpp"
#include "acr/multiscale/scaling.hpp"
#include "acr/multiscale/symbolic.hpp"
#include "acr/statistics/stationary.hpp"
#include "acr/util/error.hpp"

using namespace acr;

namespace {

ReactionNetwork bundled(const std::string& name) {
    return parse_network_file(std::string(ACR_SOURCE_DIR) + "/networks/" + name);
}

std::string golden(const std::string& name) {
    std::ifstream in(std::string(ACR_SOURCE_DIR) + "/tests/golden/" + name);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<int> alpha_discrete(const ReactionNetwork& net, const std::vector<std::string>& discrete) {
    std::vector<int> alpha(net.num_species(), 1);
    for (const auto& s : discrete) alpha[*net.species_index(s)] = 0;
    return alpha;
}

std::string reduce_text(const ReactionNetwork& net, const std::vector<std::string>& discrete) {
    DiscreteReduction d(LimitKinetics(net, alpha_discrete(net, discrete)));
    ContinuousReduction c(d);
    return reduction_text(d, &c, DiscreteAveraging::ProductForm);
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i) {
        s += std::abs((i < p.size() ? p[i] : 0.0) - (i < q.size() ? q[i] : 0.0));
    }
    return 0.5 * s;
}

std::vector<double> poisson_pmf(double mean, std::size_t n) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(k + 1.0));
    }
    return p;
}

}  // namespace

TEST_CASE("mass-action constants scale as N^(beta - ||pi_c y||)") {
    const auto simple = bundled("simple.crn");
    ScalingSpec spec{{0, 1}, {2.0, 1.0}, {100}};
    const auto sys = build_scaled_system(simple, spec, 100);
    CHECK(sys.network.reactions()[0].rate_law.kappa() == 1.0);
    CHECK(sys.network.reactions()[1].rate_law.kappa() == 2.0);
    CHECK(sys.initial_state == std::vector<Count>{2, 100});

    // Alternative EnvZ scaling: only Yp discrete, so Xp + Y -> XpY has two
    // continuous reactants and kappa6 picks up 1/N.
    const auto envz = bundled("envz_ompr.crn");
    ScalingSpec alt{alpha_discrete(envz, {"Yp"}), std::vector<double>(8, 1.0), {1000}};
    const auto scaled = build_scaled_system(envz, alt, 1000);
    CHECK(scaled.network.reactions()[5].rate_law.kappa() == doctest::Approx(1e-3).epsilon(1e-15));
    for (std::size_t r = 0; r < envz.num_reactions(); ++r) {
        if (r != 5) CHECK(scaled.network.reactions()[r].rate_law.kappa() == envz.reactions()[r].rate_law.kappa());
    }
    // The rescaled constant still prints and parses.
    CHECK(parse_network(print_network(scaled.network)) == scaled.network);

    const auto one = build_scaled_system(envz, alt, 1);
    CHECK(one.network == envz);
    CHECK(one.initial_state == std::vector<Count>(8, 1));
}

TEST_CASE("invalid scaling specs are rejected") {
    const auto simple = bundled("simple.crn");
    CHECK_THROWS_AS(validate_scaling(simple, {{0}, {1.0, 1.0}, {}}), ConfigError);
    CHECK_THROWS_AS(validate_scaling(simple, {{0, 2}, {1.0, 1.0}, {}}), ConfigError);
    CHECK_THROWS_AS(validate_scaling(simple, {{0, 1}, {1.0, 0.0}, {}}), ConfigError);
    CHECK_THROWS_AS(validate_scaling(simple, {{0, 1}, {1.0, 1.0}, {0}}), ConfigError);
}

TEST_CASE("scaled rates converge to the limiting rates on the probe grid") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
        {"simple.crn", {"A"}},
        {"collapse.crn", {"A"}},
        {"non_mass_action.crn", {"A"}},
        {"bimolecular.crn", {"A"}},
        {"not_poisson.crn", {"A"}},
        {"envz_ompr.crn", {"Y", "Yp"}},
    };
    for (const auto& [file, discrete] : cases) {
        INFO(file);
        const auto net = bundled(file);
        const LimitKinetics kin(net, alpha_discrete(net, discrete));
        check_expression_scaling(kin);
        const double e2 = scaling_limit_error(kin, 1e2);
        const double e3 = scaling_limit_error(kin, 1e3);
        const double e4 = scaling_limit_error(kin, 1e4);
        // Linear continuous dependence is exact on the grid, giving zero error.
        CHECK(e3 <= e2);
        CHECK(e4 <= e3);
        CHECK((e2 == 0.0 || e4 < e2));
        CHECK(e4 < 1e-3);
    }
}

TEST_CASE("expression laws must declare their N-dependence consistently") {
    // Undeclared: the rate grows with N, so p = 0 cannot be inferred.
    const auto undeclared = parse_network("A + B -> 2B @ expr(x[A] * x[B] * x[B])\nB -> A @ ma(1)\n");
    CHECK_THROWS_AS(check_expression_scaling(LimitKinetics(undeclared, {0, 1})), ConfigError);
    const auto declared =
        parse_network("A + B -> 2B @ expr(x[A] * x[B]) scale N^0 limit expr(x[A] * x[B])\n"
                      "B -> A @ ma(1)\n");
    CHECK_NOTHROW(check_expression_scaling(LimitKinetics(declared, {0, 1})));
    const auto wrong_limit =
        parse_network("A + B -> 2B @ expr(x[A] * x[B]) scale N^0 limit expr(2 * x[A] * x[B])\n"
                      "B -> A @ ma(1)\n");
    CHECK_THROWS_AS(check_expression_scaling(LimitKinetics(wrong_limit, {0, 1})), ConfigError);
    // Declared scale with no limit: the limit is extrapolated.
    const auto extrapolated = parse_network(
        "A + B -> 2B @ expr(x[A] * x[B] * x[B] / (1 + x[B])) scale N^0\nB -> A @ ma(1)\n");
    const LimitKinetics kin(extrapolated, {0, 1});
    CHECK_NOTHROW(check_expression_scaling(kin));
    const std::vector<double> x{3.0, 2.0};
    CHECK(kin.rate(0, x) == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("reduce output matches the golden reductions") {
    CHECK(reduce_text(bundled("simple.crn"), {"A"}) == golden("reduce_simple.txt"));
    CHECK(reduce_text(bundled("collapse.crn"), {"A"}) == golden("reduce_collapse.txt"));
    CHECK(reduce_text(bundled("non_mass_action.crn"), {"A"}) == golden("reduce_non_mass_action.txt"));
    CHECK(reduce_text(bundled("bimolecular.crn"), {"A"}) == golden("reduce_bimolecular.txt"));
    CHECK(reduce_text(bundled("envz_ompr.crn"), {"Y", "Yp"}) == golden("reduce_envz_ompr.txt"));
}

TEST_CASE("reduced discrete rates are the sums of their preimage rates") {
    for (const auto& file : {"simple.crn", "collapse.crn", "non_mass_action.crn", "bimolecular.crn"}) {
        const auto net = bundled(file);
        const LimitKinetics kin(net, alpha_discrete(net, {"A"}));
        const DiscreteReduction d(kin);
        for (const auto& x : probe_grid(kin.alpha())) {
            std::vector<double> v, w;
            for (std::size_t i : d.species()) v.push_back(x[i]);
            for (std::size_t i : d.continuous()) w.push_back(x[i]);
            for (std::size_t k = 0; k < d.reactions().size(); ++k) {
                double sum = 0.0;
                for (std::size_t r : d.reactions()[k].preimage) sum += kin.rate(r, x);
                CHECK(d.rate(k, v, w) == sum);
            }
        }
    }
}

TEST_CASE("q_d^w of the bundled reductions") {
    {
        const auto net = bundled("collapse.crn");
        const DiscreteReduction d(LimitKinetics(net, {0, 1}));
        for (double w : {0.5, 1.0, 3.0}) {
            const std::vector<double> ws{w};
            const auto eq = d.equilibrium(ws);
            REQUIRE(eq.balanced);
            CHECK(eq.q[0] == doctest::Approx((2.0 + 1.5 * w) / (1.0 + 0.5 * w)).epsilon(1e-12));
        }
    }
    {
        const auto net = bundled("bimolecular.crn");
        const DiscreteReduction d(LimitKinetics(net, alpha_discrete(net, {"A"})));
        const std::vector<double> w{2.0, 0.5, 1.0};
        const auto eq = d.equilibrium(w);
        CHECK(eq.method == "root");
        REQUIRE(eq.balanced);
        CHECK(eq.q[0] == doctest::Approx(1.0 * 2.0 / (1.0 * 0.5)).epsilon(1e-10));
    }
    {
        // 2A -> 0, 0 -> A has an equilibrium but it is not complex balanced.
        const auto net = bundled("not_poisson.crn");
        const DiscreteReduction d(LimitKinetics(net, {0, 1}));
        const std::vector<double> w{1.0};
        const auto eq = d.equilibrium(w);
        CHECK(eq.found);
        CHECK_FALSE(eq.balanced);
        CHECK(eq.q[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
        CHECK_THROWS_AS(ContinuousReduction{d}, AssumptionViolation);
    }
    {
        // Two discrete species coupled by a conversion go through Newton.
        const auto net = parse_network("A + C -> B + C @ ma(2)\nB + C -> A + C @ ma(1)\n"
                                       "C -> A + C @ ma(1)\nA + C -> C @ ma(1)\n");
        const DiscreteReduction d(LimitKinetics(net, alpha_discrete(net, {"A", "B"})));
        const std::vector<double> w{1.5};
        const auto eq = d.equilibrium(w);
        CHECK(eq.method == "newton");
        REQUIRE(eq.balanced);
        CHECK(eq.q[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(eq.q[1] == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("rates that do not factor in the discrete species are rejected") {
    const auto net = parse_network(
        "A + B -> 2B @ expr(x[A] * x[A] * x[B]) scale N^0 limit expr(x[A] * x[A] * x[B])\n"
        "B -> A @ ma(1)\n");
    CHECK_THROWS_AS(DiscreteReduction(LimitKinetics(net, {0, 1})), AssumptionViolation);
}

TEST_CASE("continuous reductions of the two-species motif and of the self-inhibition network") {
    {
        const auto net = bundled("simple.crn");
        const ContinuousReduction c(DiscreteReduction(LimitKinetics(net, {0, 1})));
        for (double w : {0.5, 1.0, 2.0, 7.0}) {
            const std::vector<double> ws{w};
            const auto rates = c.rates(ws);
            REQUIRE(rates.size() == 2);
            CHECK(rates[0] == doctest::Approx(rates[1]).epsilon(1e-14));
            CHECK(rates[0] == doctest::Approx(2.0 * w).epsilon(1e-14));
        }
        const auto sol = integrate_ode(c.rhs(), {1.0}, 5.0);
        CHECK(sol.final_state()[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        const auto net = bundled("non_mass_action.crn");
        const ContinuousReduction c(DiscreteReduction(LimitKinetics(net, {0, 1, 1})));
        const double b = 2.0, cc = 0.5;
        const auto sol = integrate_ode(c.rhs(), {b, cc}, 40.0);
        const double k1 = 1, k2 = 1, k3 = 1;
        CHECK(sol.final_state()[0] == doctest::Approx((k2 + k3) * (b + cc) / (k1 + k2 + k3)).epsilon(1e-7));
        CHECK(sol.final_state()[1] == doctest::Approx(k1 * (b + cc) / (k1 + k2 + k3)).epsilon(1e-7));
    }
}

TEST_CASE("stationary averaging keeps the negative-control reduction at rest") {
    const auto net = bundled("not_poisson.crn");
    const ContinuousReduction c(DiscreteReduction(LimitKinetics(net, {0, 1})),
                                DiscreteAveraging::Stationary);
    const std::vector<double> w{1.3};
    const auto rates = c.rates(w);
    REQUIRE(rates.size() == 2);
    // B -> 3B at 2 k1 w E[A(A-1)] balances B -> 0 at k2 w in stationarity.
    CHECK(2.0 * rates[0] == doctest::Approx(rates[1]).epsilon(1e-8));
    const auto text = reduction_text(c.discrete(), &c, DiscreteAveraging::Stationary);
    CHECK(text.find("B -> 3B [k1*E[A*(A-1)]*w]") != std::string::npos);
}

TEST_CASE("truncated stationary laws of small discrete chains") {
    {
        const auto chain = parse_network("A <-> 0 @ ma(1.5, 3)\n");
        const auto mu = truncated_stationary(chain);
        CHECK(mu.leakage < 1e-8);
        const auto pmf = mu.marginal(0);
        CHECK(tv(pmf, poisson_pmf(2.0, pmf.size())) < 1e-10);
        CHECK(mu.fano(0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    {
        const auto chain = parse_network("2A -> 0 @ ma(1)\n0 -> A @ ma(1)\n");
        const auto mu = truncated_stationary(chain);
        CHECK(std::abs(mu.fano(0) - 1.0) > 1e-3);
        const std::vector<Count> two{2};
        CHECK(mu.falling_factorial_moment(two) == doctest::Approx(0.5).epsilon(1e-9));
    }
    {
        // 0 <-> A <-> 2A with k1/k2 = k3/k4.
        const auto chain = parse_network("A -> 2A @ ma(2)\n2A -> A @ ma(1)\n0 -> A @ ma(4)\nA -> 0 @ ma(2)\n");
        const auto mu = truncated_stationary(chain);
        const auto pmf = mu.marginal(0);
        CHECK(tv(pmf, poisson_pmf(2.0, pmf.size())) < 1e-10);
    }
}

TEST_CASE("assumption audits of the bundled examples") {
    {
        const auto net = bundled("simple.crn");
        const DiscreteReduction d(LimitKinetics(net, {0, 1}));
        const std::vector<double> x0{2.0, 1.0};
        const auto audit = audit_assumptions(d, x0, 5.0);
        CHECK(audit.all_pass());
        CHECK(audit.complex_balanced.evidence["reachability"]["irreducible"] == true);
        CHECK(audit.limit_positive.evidence["min_z"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(audit.discrete_fast.evidence["witness_reactions"]["A"].size() == 2);
    }
    {
        const auto net = bundled("bimolecular.crn");
        const DiscreteReduction d(LimitKinetics(net, alpha_discrete(net, {"A"})));
        const std::vector<double> x0{2.0, 1.0, 0.5, 2.0};
        const auto audit = audit_assumptions(d, x0, 5.0);
        CHECK(audit.discrete_fast.passed());
        CHECK(audit.complex_balanced.passed());
        CHECK(audit.limit_positive.passed());
        CHECK(audit.corollary_structural.status == "fail");
        CHECK(audit.corollary_structural.evidence["offending_complexes"][0] == "2A + C");
    }
    {
        const auto net = bundled("not_poisson.crn");
        const DiscreteReduction d(LimitKinetics(net, {0, 1}));
        const std::vector<double> x0{1.0, 1.0};
        const auto audit = audit_assumptions(d, x0, 5.0);
        CHECK(audit.complex_balanced.status == "fail");
        CHECK(audit.limit_positive.status == "unknown");
        AuditOptions opt;
        opt.mode = DiscreteAveraging::Stationary;
        const auto remark = audit_assumptions(d, x0, 5.0, opt);
        CHECK(remark.limit_positive.passed());
        CHECK(to_json(remark)["all_pass"] == false);
    }
    {
        const auto net = bundled("envz_ompr.crn");
        const DiscreteReduction d(LimitKinetics(net, alpha_discrete(net, {"Y", "Yp"})));
        const std::vector<double> x0(8, 1.0);
        const auto audit = audit_assumptions(d, x0, 10.0);
        CHECK(audit.all_pass());
        CHECK(audit.complex_balanced.evidence["weakly_reversible"] == true);
    }
    {
        // The self-inhibition rate is not mass action; its envelope is probed.
        const auto net = bundled("non_mass_action.crn");
        const DiscreteReduction d(LimitKinetics(net, {0, 1, 1}));
        const std::vector<double> x0{1.0, 2.0, 0.5};
        const auto audit = audit_assumptions(d, x0, 5.0);
        CHECK(audit.all_pass());
        CHECK(audit.corollary_structural.evidence["expression_envelopes"]["0"]["bounded"] == true);
    }
}

TEST_CASE("a discrete species without fast reactions fails the first check") {
    const auto net = parse_network("A -> 0 @ ma(1)\n0 -> A @ ma(1)\nB -> 2B @ ma(1)\n2B -> B @ ma(1)\n");
    const DiscreteReduction d(LimitKinetics(net, {0, 1}));
    const std::vector<double> x0{1.0, 1.0};
    const auto audit = audit_assumptions(d, x0, 1.0);
    CHECK(audit.discrete_fast.status == "fail");
}
