#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "acr/study/config.hpp"
#include "acr/study/study.hpp"
#include "acr/util/error.hpp"
#include "oracles/calibration.hpp"

using namespace acr;
using nlohmann::json;

namespace {

std::filesystem::path studies_dir() { return std::filesystem::path(ACR_SOURCE_DIR) / "studies"; }

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    return json::parse(in);
}

json small_simple() {
    auto j = read_json(studies_dir() / "simple.json");
    j["scaling"]["N"] = {20, 200};
    j["T"] = 1.0;
    j["delta"] = 0.1;
    j["replicas"] = 60;
    j["path_replicas"] = 10;
    j.erase("time_budget_minutes");
    return j;
}

}  // namespace

TEST_CASE("bundled study configs parse and resolve their networks") {
    for (const auto& name : {"simple", "non_mass_action", "not_poisson", "bimolecular", "envz_ompr",
                             "envz_ompr_alt"}) {
        CAPTURE(name);
        const auto cfg = load_study_config(studies_dir() / (std::string(name) + ".json"));
        CHECK(cfg.name == name);
        const auto net = cfg.load_network();
        const auto spec = cfg.scaling(net);
        CHECK(spec.alpha.size() == net.num_species());
        CHECK(cfg.seed == 20261018u);
        CHECK(cfg.delta < cfg.T);
    }
}

TEST_CASE("config validation is fail-closed") {
    const auto base = small_simple();
    SUBCASE("unknown top-level key") {
        auto j = base;
        j["replica"] = 3;
        CHECK_THROWS_AS(parse_study_config(j, studies_dir()), ConfigError);
    }
    SUBCASE("unknown threshold key") {
        auto j = base;
        j["thresholds"]["tv"] = 0.1;
        CHECK_THROWS_AS(parse_study_config(j, studies_dir()), ConfigError);
    }
    SUBCASE("delta >= T") {
        auto j = base;
        j["delta"] = 1.0;
        CHECK_THROWS_AS(parse_study_config(j, studies_dir()), ConfigError);
    }
    SUBCASE("wrong schema") {
        auto j = base;
        j["schema"] = "acr-scope/study/0";
        CHECK_THROWS_AS(parse_study_config(j, studies_dir()), ConfigError);
    }
    SUBCASE("alpha must cover every species") {
        auto j = base;
        j["scaling"]["alpha"].erase("B");
        const auto cfg = parse_study_config(j, studies_dir());
        CHECK_THROWS_AS(cfg.scaling(cfg.load_network()), ConfigError);
    }
    SUBCASE("zero replicas") {
        auto j = base;
        j["replicas"] = 0;
        CHECK_THROWS_AS(parse_study_config(j, studies_dir()), ConfigError);
    }
    SUBCASE("round trip") {
        const auto cfg = parse_study_config(base, studies_dir());
        const auto again = parse_study_config(json::parse(to_json(cfg).dump()), studies_dir());
        CHECK(to_json(again).dump() == to_json(cfg).dump());
    }
}

TEST_CASE("study thresholds agree with the calibration oracles") {
    const double m = oracle::brownian_sup_abs_median();
    CHECK(m == doctest::Approx(1.14897).epsilon(1e-4));

    const auto simple = load_study_config(studies_dir() / "simple.json");
    const double predicted = oracle::immigration_death_residual_median(2.0, 1.0, simple.T) /
                             std::sqrt(double(simple.n_grid.back()));
    REQUIRE(simple.thresholds.residual_max);
    CHECK(*simple.thresholds.residual_max == doctest::Approx(2.0 * predicted).epsilon(0.01));

    const auto pmf = oracle::dimerization_stationary(1.0, 1.0, 60);
    double mean = 0.0, second = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        mean += k * pmf[k];
        second += double(k) * k * pmf[k];
    }
    const double fano = (second - mean * mean) / mean;
    CHECK(std::abs(fano - 1.0) > 1e-3);
    const auto np = load_study_config(studies_dir() / "not_poisson.json");
    REQUIRE(np.thresholds.tv_best_poisson_min);
    CHECK(*np.thresholds.tv_best_poisson_min ==
          doctest::Approx(0.5 * oracle::tv_to_matched_poisson(pmf)).epsilon(0.01));
}

TEST_CASE("constant overrides and formula evaluation") {
    const auto file = std::filesystem::path(ACR_SOURCE_DIR) / "networks" / "non_mass_action_limit.crn";
    CHECK(evaluate_constant_formula(file, "k1 * k3 / (k0 * (k2 + k3))") == doctest::Approx(0.5));
    CHECK(evaluate_constant_formula(file, "k1 * k3 / (k0 * (k2 + k3))", {{"k0", 2.0}}) ==
          doctest::Approx(0.25));
    CHECK(override_constants("let k0 = 1;\nlet k10 = 3;\n", {{"k0", 2.0}}).find("let k10 = 3;") !=
          std::string::npos);
}

TEST_CASE("a small study is byte-reproducible and thread-count independent") {
    const auto cfg = parse_study_config(small_simple(), studies_dir());
    StudyOptions one;
    one.threads = 1;
    StudyOptions two;
    two.threads = 2;
    const auto a = run_study(cfg, one).to_json().dump(2);
    const auto b = run_study(cfg, one).to_json().dump(2);
    const auto c = run_study(cfg, two).to_json().dump(2);
    CHECK(a == b);
    CHECK(a == c);

    StudyOptions reseeded = one;
    reseeded.seed = 7;
    CHECK(run_study(cfg, reseeded).to_json().dump(2) != a);
}

TEST_CASE("study output files and re-rendered summary") {
    const auto cfg = parse_study_config(small_simple(), studies_dir());
    const auto dir = std::filesystem::temp_directory_path() / "acr_study_test";
    std::filesystem::remove_all(dir);
    StudyOptions opt;
    opt.threads = 1;
    opt.out_dir = dir;
    const auto res = run_study(cfg, opt);
    for (const auto& f : {"statistics.json", "summary.md", "ode.csv", "N20/replicas.csv", "N200/marginals.csv"}) {
        CAPTURE(f);
        CHECK(std::filesystem::exists(dir / f));
    }
    const auto stats = nlohmann::ordered_json::parse(std::ifstream(dir / "statistics.json"));
    std::ifstream md(dir / "summary.md");
    const std::string summary((std::istreambuf_iterator<char>(md)), std::istreambuf_iterator<char>());
    CHECK(render_summary(stats) == summary);
    CHECK(stats.dump(2) == res.to_json().dump(2));
    std::filesystem::remove_all(dir);
}
