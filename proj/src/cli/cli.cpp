#include "acr/cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "acr/dynamics/ssa.hpp"
#include "acr/equilibria/equilibrium.hpp"
#include "acr/model/parser.hpp"
#include "acr/multiscale/audit.hpp"
#include "acr/multiscale/reduction.hpp"
#include "acr/multiscale/scaling.hpp"
#include "acr/multiscale/symbolic.hpp"
#include "acr/structural/structure.hpp"
#include "acr/study/config.hpp"
#include "acr/study/study.hpp"
#include "acr/util/error.hpp"

namespace acr::cli {

namespace {

using ojson = nlohmann::ordered_json;

// "A=2" items into a map; an item without '=' is a ConfigError.
std::map<std::string, double> parse_assignments(const std::vector<std::string>& items,
                                                const std::string& flag) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(flag + ": expected NAME=VALUE, got '" + item + "'");
        const std::string name = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size()) throw ConfigError(flag + ": bad number '" + value + "' for " + name);
        out[name] = v;
    }
    return out;
}

// Scaling from --discrete and --x0; unlisted x0 coordinates default to 1.
ScalingSpec scaling_from_flags(const ReactionNetwork& net, const std::vector<std::string>& discrete,
                               const std::vector<std::string>& x0_items) {
    ScalingSpec spec;
    spec.alpha.assign(net.num_species(), 1);
    spec.x0.assign(net.num_species(), 1.0);
    for (const auto& name : discrete) {
        const auto idx = net.species_index(name);
        if (!idx) throw ConfigError("--discrete: unknown species " + name);
        spec.alpha[*idx] = 0;
    }
    for (const auto& [name, v] : parse_assignments(x0_items, "--x0")) {
        const auto idx = net.species_index(name);
        if (!idx) throw ConfigError("--x0: unknown species " + name);
        spec.x0[*idx] = v;
    }
    validate_scaling(net, spec);
    return spec;
}

std::vector<std::string> names_of(const ReactionNetwork& net) {
    std::vector<std::string> out;
    for (const auto& s : net.species()) out.push_back(s.name);
    return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
}

struct AnalyzeArgs {
    std::string file;
    std::string out;
    std::uint64_t seed = 1;
    std::size_t classes = 10;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const auto net = parse_network_file(a.file);
    ojson j;
    j["network"] = a.file;
    j["species"] = names_of(net);
    j["structure"] = to_json(analyze_structure(net), net);
    if (net.all_mass_action()) {
        AcrOptions opt;
        opt.seed = a.seed;
        opt.num_classes = a.classes;
        j["acr"] = to_json(detect_acr(net, opt), net);
    } else {
        j["acr"] = {{"skipped", "ACR detection needs mass-action kinetics"}};
    }
    emit(j.dump(2) + "\n", a.out, out);
    return kOk;
}

struct ReduceArgs {
    std::string file;
    std::vector<std::string> discrete;
    std::vector<std::string> x0;
    double T = 1.0;
    bool remark_3_7 = false;
    bool json = false;
    bool no_audit = false;
    std::string out;
};

int cmd_reduce(const ReduceArgs& a, std::ostream& out, std::ostream& err) {
    const auto net = parse_network_file(a.file);
    if (a.discrete.empty()) throw ConfigError("--discrete: name at least one discrete species");
    if (!(a.T > 0.0)) throw ConfigError("--T must be positive");
    const auto spec = scaling_from_flags(net, a.discrete, a.x0);
    LimitKinetics kinetics(net, spec.alpha);
    check_expression_scaling(kinetics);
    const DiscreteReduction d(kinetics);  // throws on factorization failure
    const auto mode = a.remark_3_7 ? DiscreteAveraging::Stationary : DiscreteAveraging::ProductForm;

    std::optional<ContinuousReduction> cont;
    std::string unavailable;
    try {
        cont.emplace(d, mode);
    } catch (const AssumptionViolation& e) {
        unavailable = e.what();
    }
    AuditOptions audit_opt;
    audit_opt.mode = mode;
    const auto audit = audit_assumptions(d, spec.x0, a.T, audit_opt);
    const bool suggest = !a.remark_3_7 && !audit.complex_balanced.passed();
    const std::string hint =
        "S_d^w is not complex balanced, so the product-form Poisson average does not apply; "
        "rerun with --remark-3-7 to average against the stationary law of S_d^w";

    if (a.json) {
        const ReductionPrinter printer(d, mode);
        ojson j;
        j["network"] = a.file;
        j["mode"] = a.remark_3_7 ? "stationary" : "product_form";
        j["discrete_species"] = d.species_names();
        std::vector<std::string> cont_names;
        for (std::size_t i : d.continuous()) cont_names.push_back(net.species()[i].name);
        j["continuous_species"] = cont_names;
        j["discrete_reduction"] = printer.discrete_lines();
        if (mode == DiscreteAveraging::ProductForm) j["q"] = printer.q_lines();
        if (cont) {
            j["continuous_reduction"] = printer.continuous_lines(*cont);
        } else {
            j["continuous_reduction"] = nullptr;
            j["continuous_unavailable"] = unavailable;
        }
        j["audit"] = to_json(audit);
        if (suggest) j["suggestion"] = "--remark-3-7";
        emit(j.dump(2) + "\n", a.out, out);
    } else {
        std::string text = reduction_text(d, cont ? &*cont : nullptr, mode, unavailable);
        if (!a.no_audit) text += audit_text(audit);
        if (!text.empty() && text.back() != '\n') text += '\n';
        if (suggest) text += "hint: " + hint + "\n";
        emit(text, a.out, out);
    }
    if (suggest && !a.out.empty()) err << "hint: " << hint << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string file;
    std::vector<std::string> discrete;
    std::vector<std::string> x0;
    long long N = 1000;
    double T = 1.0;
    std::uint64_t seed = 1;
    std::size_t stride = 1;
    std::uint64_t max_events = 1'000'000'000ULL;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto net = parse_network_file(a.file);
    if (a.N < 1) throw ConfigError("--N must be at least 1");
    if (!(a.T > 0.0)) throw ConfigError("--T must be positive");
    auto spec = scaling_from_flags(net, a.discrete, a.x0);
    spec.n_grid = {a.N};
    check_expression_scaling(LimitKinetics(net, spec.alpha));
    const auto sys = build_scaled_system(net, spec, a.N);
    SsaOptions opt;
    opt.N = a.N;
    opt.max_events = a.max_events;
    const auto tr = simulate_ssa(sys, a.T, a.seed, opt);
    spdlog::info("simulate: N = {}, {} events, seed {}", a.N, tr.size() - 1, a.seed);
    if (a.out.empty()) {
        tr.write_csv(out, names_of(net), a.stride);
    } else {
        tr.export_csv(a.out, names_of(net), a.stride);
    }
    return kOk;
}

struct StudyArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::string out;
    bool remark_3_7 = false;
};

int cmd_study(const StudyArgs& a, std::ostream& out) {
    const auto cfg = load_study_config(a.config);
    StudyOptions opt;
    opt.threads = a.threads;
    opt.seed = a.seed;
    opt.remark_3_7 = a.remark_3_7;
    opt.out_dir = a.out.empty() ? std::filesystem::path("acr-out") / cfg.name : std::filesystem::path(a.out);
    std::filesystem::create_directories(opt.out_dir);
    const auto res = run_study(cfg, opt);
    out << cfg.name << ": " << (res.verdict() ? "PASS" : "FAIL") << "\n";
    for (const auto& c : res.checks) {
        out << "  [" << (c.passed ? "pass" : "FAIL") << "] " << c.name << ": " << c.detail << "\n";
    }
    out << "outputs: " << opt.out_dir.string() << "\n";
    return res.all_failed_at_some_n ? kRuntimeFailure : kOk;
}

int cmd_report(const std::string& dir, std::ostream& out) {
    const auto path = std::filesystem::path(dir) / "statistics.json";
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    ojson stats;
    try {
        stats = ojson::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    const auto md = render_summary(stats);
    std::ofstream f(std::filesystem::path(dir) / "summary.md", std::ios::binary);
    if (!f) throw Error("cannot write summary.md in " + dir);
    f << md;
    out << md;
    return kOk;
}

}  // namespace

void configure_logging() {
    auto logger = spdlog::stderr_logger_mt("acr-scope");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("ACR_SCOPE_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only honour that when asked.
        if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analyze, reduce and simulate two-scale reaction networks", "acr-scope"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Structural report and ACR detection (JSON)");
    an->add_option("network", analyze.file, "Network file")->required();
    an->add_option("--out", analyze.out, "Write the JSON here instead of stdout");
    an->add_option("--seed", analyze.seed, "Seed of the equilibrium sampling");
    an->add_option("--classes", analyze.classes, "Compatibility classes sampled")->check(CLI::PositiveNumber);

    ReduceArgs reduce;
    auto* re = app.add_subcommand("reduce", "Print S_d^w, q_d^w, S_c and the assumption audit");
    re->add_option("network", reduce.file, "Network file")->required();
    re->add_option("--discrete", reduce.discrete, "Discrete species (alpha = 0), comma separated")
        ->delimiter(',');
    re->add_option("--x0", reduce.x0, "Initial point for the audit, NAME=VALUE,... (default 1)")
        ->delimiter(',');
    re->add_option("--T", reduce.T, "Horizon of the positivity check");
    re->add_flag("--remark-3-7", reduce.remark_3_7, "Average discrete species against the stationary law");
    re->add_flag("--json", reduce.json, "JSON output");
    re->add_flag("--no-audit", reduce.no_audit, "Omit the audit from the text output");
    re->add_option("--out", reduce.out, "Write here instead of stdout");

    SimulateArgs simulate;
    auto* si = app.add_subcommand("simulate", "Export one exact trajectory of the scaled process as CSV");
    si->add_option("network", simulate.file, "Network file")->required();
    si->add_option("--discrete", simulate.discrete, "Discrete species, comma separated")->delimiter(',');
    si->add_option("--x0", simulate.x0, "Scaled initial point NAME=VALUE,... (default 1)")->delimiter(',');
    si->add_option("--N", simulate.N, "Scaling parameter");
    si->add_option("--T", simulate.T, "Horizon");
    si->add_option("--seed", simulate.seed, "Seed");
    si->add_option("--stride", simulate.stride, "Keep every k-th event (the last is always kept)");
    si->add_option("--max-events", simulate.max_events, "Explosion guard");
    si->add_option("--out", simulate.out, "CSV path (default stdout)");

    StudyArgs study;
    auto* st = app.add_subcommand("study", "Run an ensemble study from a JSON config");
    st->add_option("config", study.config, "Study config")->required();
    st->add_option("--seed", study.seed, "Override the config seed");
    st->add_option("--threads", study.threads, "Worker threads (default: available cores)");
    st->add_option("--out", study.out, "Output directory (default acr-out/<name>)");
    st->add_flag("--remark-3-7", study.remark_3_7, "Average discrete species against the stationary law");

    std::string report_dir;
    auto* rp = app.add_subcommand("report", "Re-render summary.md from statistics.json");
    rp->add_option("dir", report_dir, "Study output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*an) return cmd_analyze(analyze, out);
        if (*re) return cmd_reduce(reduce, out, err);
        if (*si) return cmd_simulate(simulate, out);
        if (*st) return cmd_study(study, out);
        if (*rp) return cmd_report(report_dir, out);
    } catch (const ParseError& e) {
        err << "error: parse error at " << e.what() << "\n";
        return kInputError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const NetworkError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const AssumptionViolation& e) {
        err << "assumption violated: " << e.what() << "\n";
        return kAssumptionViolation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kInputError;
}

}  // namespace acr::cli
