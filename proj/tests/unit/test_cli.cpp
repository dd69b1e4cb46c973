#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "acr/cli/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "acr-scope");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = acr::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string bundled(const std::string& name) { return (fs::path(ACR_SOURCE_DIR) / "networks" / name).string(); }

fs::path scratch(const std::string& name, const std::string& text) {
    const auto p = fs::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("analyze reports structure and the ACR value as JSON") {
    const auto r = cli({"analyze", bundled("simple.crn")});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["structure"]["deficiency"] == 1);
    CHECK(j["acr"]["acr_values"]["A"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("malformed network exits 2 with the line number") {
    const auto bad = scratch("acr_cli_bad.crn", "let k = 1;\nA + B -> 2B @ ma(k)\nB -> A @ ma(\n");
    const auto r = cli({"analyze", bad.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(cli({"analyze", "/nonexistent/file.crn"}).code == 2);
}

TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"reduce", bundled("simple.crn"), "--discrete", "Q"}).code == 2);
    CHECK(cli({"reduce", bundled("simple.crn"), "--discrete", "A", "--x0", "A"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("reduce prints both reductions and the audit") {
    const auto r = cli({"reduce", bundled("simple.crn"), "--discrete", "A"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("A <=> 0 [k1*w] [k2*w]") != std::string::npos);
    CHECK(r.out.find("0 <- B -> 2B [k2*w]") != std::string::npos);
    CHECK(r.out.find("complex_balanced: pass") != std::string::npos);

    const auto j = cli({"reduce", bundled("simple.crn"), "--discrete", "A", "--json"});
    REQUIRE(j.code == 0);
    const auto parsed = nlohmann::json::parse(j.out);
    CHECK(parsed["q"][0] == "q[A] = k2/k1");
    CHECK(parsed["audit"]["complex_balanced"]["status"] == "pass");
}

TEST_CASE("reduce flags the non-complex-balanced discrete system") {
    const auto r = cli({"reduce", bundled("not_poisson.crn"), "--discrete", "A"});
    CHECK(r.code == 0);
    CHECK(r.out.find("complex_balanced: fail") != std::string::npos);
    CHECK(r.out.find("--remark-3-7") != std::string::npos);
    const auto s = cli({"reduce", bundled("not_poisson.crn"), "--discrete", "A", "--remark-3-7"});
    CHECK(s.code == 0);
    CHECK(s.out.find("E[A*(A-1)]") != std::string::npos);
}

TEST_CASE("factorization failure exits 3 naming the reaction") {
    const auto net = scratch("acr_cli_nofactor.crn",
                             "A + B -> 2B @ expr(x[A] * x[A] * x[B]) scale N^0 limit expr(x[A] * x[A] * x[B])\n"
                             "B -> A @ ma(1)\n");
    const auto r = cli({"reduce", net.string(), "--discrete", "A"});
    CHECK(r.code == 3);
    CHECK(r.err.find("A + B -> 2B") != std::string::npos);
}

TEST_CASE("simulate writes a reproducible CSV trajectory") {
    const std::vector<std::string> args{"simulate", bundled("simple.crn"), "--discrete", "A", "--x0", "A=2,B=1",
                                        "--N", "100", "--T", "0.5", "--seed", "9"};
    const auto a = cli(args);
    const auto b = cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("t,A,B,reaction\n0,2,100,-1\n", 0) == 0);
}

TEST_CASE("study rejects invalid configs with exit 2") {
    std::ifstream in(fs::path(ACR_SOURCE_DIR) / "studies" / "simple.json");
    auto j = nlohmann::json::parse(in);
    j["delta"] = j["T"];
    const auto bad = fs::temp_directory_path() / "acr_cli_bad_study.json";
    j["network"] = (fs::path(ACR_SOURCE_DIR) / "networks" / "simple.crn").string();
    std::ofstream(bad) << j.dump();
    const auto r = cli({"study", bad.string(), "--out", (fs::temp_directory_path() / "acr_cli_bad_out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("delta") != std::string::npos);
    CHECK(cli({"report", (fs::temp_directory_path() / "acr_cli_missing").string()}).code == 2);
}

TEST_CASE("study and report round trip on a small config") {
    std::ifstream in(fs::path(ACR_SOURCE_DIR) / "studies" / "simple.json");
    auto j = nlohmann::json::parse(in);
    j["network"] = (fs::path(ACR_SOURCE_DIR) / "networks" / "simple.crn").string();
    j["scaling"]["N"] = {20, 200};
    j["T"] = 1.0;
    j["delta"] = 0.1;
    j["replicas"] = 40;
    j["path_replicas"] = 5;
    const auto cfg = fs::temp_directory_path() / "acr_cli_small_study.json";
    std::ofstream(cfg) << j.dump();
    const auto out = fs::temp_directory_path() / "acr_cli_small_out";
    fs::remove_all(out);
    const auto r = cli({"study", cfg.string(), "--out", out.string(), "--threads", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("simple: ", 0) == 0);
    std::ifstream md(out / "summary.md");
    const std::string summary((std::istreambuf_iterator<char>(md)), std::istreambuf_iterator<char>());
    fs::remove(out / "summary.md");
    const auto rep = cli({"report", out.string()});
    CHECK(rep.code == 0);
    CHECK(rep.out == summary);
    CHECK(fs::exists(out / "summary.md"));
    fs::remove_all(out);
}
