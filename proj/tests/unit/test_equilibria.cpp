#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "acr/dynamics/ode.hpp"
#include "acr/dynamics/rng.hpp"
#include "acr/equilibria/equilibrium.hpp"
#include "acr/model/parser.hpp"

using namespace acr;

namespace {

ReactionNetwork bundled(const std::string& name) {
    return parse_network_file(std::string(ACR_SOURCE_DIR) + "/networks/" + name);
}

}  // namespace

TEST_CASE("equilibrium of the two-species motif in the class of (1, 9)") {
    const auto net = bundled("simple.crn");
    const std::vector<double> anchor{1.0, 9.0};
    const auto eq = find_positive_equilibrium(net, anchor);
    REQUIRE(eq);
    CHECK(eq->concentrations[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(eq->concentrations[1] == doctest::Approx(8.0).epsilon(1e-10));
    CHECK(rhs_residual(net, eq->concentrations) < 1e-9);
}

TEST_CASE("mass-action limit of the self-inhibition network has x_A = k1 k3 / (k0 (k2 + k3))") {
    const auto net = bundled("non_mass_action_limit.crn");
    const std::vector<double> anchor{1.0, 2.0, 3.0};
    const auto eq = find_positive_equilibrium(net, anchor);
    REQUIRE(eq);
    CHECK(eq->concentrations[0] == doctest::Approx(0.5).epsilon(1e-9));
    double total = 0.0;
    for (double z : eq->concentrations) total += z;
    CHECK(total == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("a one-way conversion has no positive equilibrium") {
    const auto net = parse_network("A -> B @ ma(1)");
    const std::vector<double> anchor{1.0, 1.0};
    CHECK_FALSE(find_positive_equilibrium(net, anchor));
}

TEST_CASE("expression kinetics are rejected by the equilibrium finder") {
    const auto net = bundled("non_mass_action.crn");
    const std::vector<double> anchor{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(find_positive_equilibrium(net, anchor), NetworkError);
}

TEST_CASE("ACR sampling finds A in the two-species motif") {
    AcrOptions opt;
    opt.num_classes = 20;
    const auto rep = detect_acr(bundled("simple.crn"), opt);
    // Classes with total mass below 2 have only the boundary equilibrium.
    CHECK(rep.anchors_tried == 20);
    CHECK(rep.equilibria_sampled >= 10);
    for (const auto& e : rep.equilibria) CHECK(e.anchor[0] + e.anchor[1] > 2.0);
    REQUIRE(rep.acr_species == std::vector<std::size_t>{0});
    CHECK(rep.acr_values.at(0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(rep.non_degenerate);
}

TEST_CASE("ACR sampling finds Yp in the signal transduction network") {
    const auto net = bundled("envz_ompr.crn");
    const auto rep = detect_acr(net);
    const std::size_t yp = *net.species_index("Yp");
    CHECK(rep.equilibria_sampled >= 5);
    REQUIRE(rep.acr_species == std::vector<std::size_t>{yp});
    CHECK(rep.acr_values.at(yp) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(rep.non_degenerate);
    const auto j = to_json(rep, net);
    CHECK(j["acr_species"][0] == "Yp");
}

TEST_CASE("no ACR species in a deficiency-zero reversible network") {
    const auto net = parse_network("A <-> B @ ma(1, 2)\n");
    const auto rep = detect_acr(net);
    CHECK(rep.acr_species.empty());
    CHECK(rep.non_degenerate);
}

TEST_CASE("Philox4x32-10 matches the reference known-answer vector") {
    Philox rng(0, 0);
    CHECK(rng() == 0xe169c58d6627e8d5ULL);
    CHECK(rng() == 0x9b00dbd8bc57ac4cULL);
}

TEST_CASE("Philox streams are reproducible and distinct") {
    auto a = Philox::for_replica(7, 3);
    auto b = Philox::for_replica(7, 3);
    auto c = Philox::for_replica(7, 4);
    auto d = Philox::for_replica(7, 3, 1);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ_c |= x != c();
        differ_d |= x != d();
    }
    CHECK(differ_c);
    CHECK(differ_d);
    double sum = 0.0;
    Philox u(99);
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("DOPRI5 reproduces closed-form solutions") {
    const OdeRhs decay = [](double, std::span<const double> z, std::span<double> dz) {
        dz[0] = -z[0];
        dz[1] = -2.0 * z[1];
    };
    const auto sol = integrate_ode(decay, {1.0, 3.0}, 5.0);
    CHECK(sol.final_state()[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-7));
    CHECK(sol.final_state()[1] == doctest::Approx(3.0 * std::exp(-10.0)).epsilon(1e-6));
    for (double t : {0.0, 0.3, 1.7, 2.5, 4.99}) {
        const auto z = sol.evaluate(t);
        CHECK(z[0] == doctest::Approx(std::exp(-t)).epsilon(1e-6));
    }
    CHECK(sol.min_coordinate() > 0.0);
    CHECK(sol.min_coordinate() <= 3.0 * std::exp(-10.0) * (1 + 1e-6));

    const OdeRhs oscillator = [](double, std::span<const double> z, std::span<double> dz) {
        dz[0] = z[1];
        dz[1] = -z[0];
    };
    const auto osc = integrate_ode(oscillator, {1.0, 0.0}, 2.0 * M_PI);
    CHECK(std::abs(osc.final_state()[0] - 1.0) < 1e-6);
    CHECK(std::abs(osc.final_state()[1]) < 1e-6);
    const auto quarter = osc.evaluate(M_PI / 2);
    CHECK(std::abs(quarter[0]) < 1e-6);
    // cos dips to -1 between grid points; the sampled minimum sees it.
    CHECK(osc.min_coordinate() < -0.999);
}

TEST_CASE("finite-time blow-up raises step size underflow") {
    const OdeRhs blowup = [](double, std::span<const double> z, std::span<double> dz) {
        dz[0] = z[0] * z[0];
    };
    try {
        integrate_ode(blowup, {1.0}, 2.0);
        FAIL("expected underflow");
    } catch (const StepSizeUnderflow& e) {
        CHECK(e.last_t() <= 1.0 + 1e-9);
        CHECK(e.last_t() > 0.9);
    }
}

TEST_CASE("network right-hand side conserves mass along trajectories") {
    const auto net = bundled("envz_ompr.crn");
    const std::vector<double> z0{1.0, 0.5, 0.2, 0.1, 3.0, 0.0, 0.0, 0.0};
    const auto sol = integrate_ode(network_rhs(net), z0, 20.0);
    // X-total and Y-total are both conserved.
    auto x_total = [&](const std::vector<double>& z) {
        return z[0] + z[1] + z[2] + z[3] + z[5] + z[7];
    };
    auto y_total = [&](const std::vector<double>& z) { return z[4] + z[5] + z[6] + z[7]; };
    CHECK(x_total(sol.final_state()) == doctest::Approx(x_total(z0)).epsilon(1e-8));
    CHECK(y_total(sol.final_state()) == doctest::Approx(y_total(z0)).epsilon(1e-8));
    CHECK(sol.min_coordinate() >= -1e-9);
}
