#include "acr/study/config.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "acr/model/expression.hpp"
#include "acr/model/parser.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
    return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

ObservableSpec parse_observable(const json& j, std::size_t i) {
    const std::string where = "observables[" + std::to_string(i) + "]";
    check_keys(j, {"species", "g", "set", "cap"}, where);
    ObservableSpec o;
    o.species = get<std::string>(j, "species", where);
    o.g = get<std::string>(j, "g", where);
    if (o.g == "indicator") {
        o.set = get<std::vector<Count>>(j, "set", where);
        if (o.set.empty()) throw ConfigError(where + ": indicator set is empty");
        std::sort(o.set.begin(), o.set.end());
    } else if (o.g == "truncated_second_moment") {
        o.cap = get<Count>(j, "cap", where);
        if (o.cap <= 0) throw ConfigError(where + ": cap must be positive");
    } else if (o.g != "mean") {
        throw ConfigError(where + ": g must be mean, indicator or truncated_second_moment");
    }
    if (o.g != "indicator" && j.contains("set")) throw ConfigError(where + ": 'set' needs g = indicator");
    if (o.g != "truncated_second_moment" && j.contains("cap")) {
        throw ConfigError(where + ": 'cap' needs g = truncated_second_moment");
    }
    return o;
}

std::optional<double> opt_double(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) return std::nullopt;
    return get<double>(j, key, where);
}

}  // namespace

std::string ObservableSpec::label() const {
    if (g == "mean") return species;
    if (g == "indicator") {
        std::string s = "1{" + species + " in ";
        for (std::size_t i = 0; i < set.size(); ++i) s += (i ? "," : "") + std::to_string(set[i]);
        return s + "}";
    }
    return "min(" + species + "," + std::to_string(cap) + ")^2";
}

double ObservableSpec::operator()(Count x) const {
    if (g == "mean") return static_cast<double>(x);
    if (g == "indicator") return std::binary_search(set.begin(), set.end(), x) ? 1.0 : 0.0;
    const double m = static_cast<double>(std::min(x, cap));
    return m * m;
}

std::filesystem::path StudyConfig::resolve(const std::string& relative) const {
    const std::filesystem::path p(relative);
    return p.is_absolute() ? p : base_dir / p;
}

ReactionNetwork StudyConfig::load_network() const {
    return parse_network_file(resolve(network_file).string());
}

ScalingSpec StudyConfig::scaling(const ReactionNetwork& net) const {
    ScalingSpec spec;
    for (const auto& s : net.species()) {
        const auto a = alpha_by_name.find(s.name);
        if (a == alpha_by_name.end()) throw ConfigError("scaling.alpha: species " + s.name + " is not assigned");
        const auto x = x0_by_name.find(s.name);
        if (x == x0_by_name.end()) throw ConfigError("scaling.x0: species " + s.name + " has no value");
        spec.alpha.push_back(a->second);
        spec.x0.push_back(x->second);
    }
    for (const auto& [name, v] : alpha_by_name) {
        if (!net.species_index(name)) throw ConfigError("scaling.alpha: unknown species " + name);
    }
    for (const auto& [name, v] : x0_by_name) {
        if (!net.species_index(name)) throw ConfigError("scaling.x0: unknown species " + name);
    }
    spec.n_grid = n_grid;
    validate_scaling(net, spec);
    return spec;
}

StudyConfig parse_study_config(const json& j, const std::filesystem::path& base_dir) {
    const std::string top = "study config";
    check_keys(j, {"schema", "name", "description", "network", "scaling", "T", "delta", "replicas",
                   "path_replicas", "seed", "mode", "observables", "marginal_species", "expectation",
                   "thresholds", "value_check", "notes", "time_budget_minutes"},
               top);
    if (get<std::string>(j, "schema", top) != kStudySchema) {
        throw ConfigError(top + ": schema must be \"" + std::string(kStudySchema) + "\"");
    }
    StudyConfig c;
    c.base_dir = base_dir;
    c.name = get<std::string>(j, "name", top);
    c.description = get_or<std::string>(j, "description", "", top);
    c.network_file = get<std::string>(j, "network", top);

    const auto& sc = j.contains("scaling") ? j.at("scaling") : throw ConfigError(top + ": missing key 'scaling'");
    check_keys(sc, {"alpha", "x0", "N"}, "scaling");
    c.alpha_by_name = get<std::map<std::string, int>>(sc, "alpha", "scaling");
    c.x0_by_name = get<std::map<std::string, double>>(sc, "x0", "scaling");
    c.n_grid = get<std::vector<long long>>(sc, "N", "scaling");
    if (c.n_grid.empty()) throw ConfigError("scaling.N: empty grid");
    for (long long n : c.n_grid) {
        if (n < 1) throw ConfigError("scaling.N: values must be >= 1");
    }
    if (!std::is_sorted(c.n_grid.begin(), c.n_grid.end())) throw ConfigError("scaling.N: must be increasing");

    c.T = get<double>(j, "T", top);
    if (!(c.T > 0.0)) throw ConfigError("T must be positive");
    c.delta = get_or<double>(j, "delta", c.T / 10.0, top);
    if (!(c.delta >= 0.0) || !(c.delta < c.T)) throw ConfigError("delta must satisfy 0 <= delta < T");
    c.replicas = get<std::size_t>(j, "replicas", top);
    if (c.replicas < 1) throw ConfigError("replicas must be >= 1");
    c.path_replicas = std::min(c.replicas, get_or<std::size_t>(j, "path_replicas", 200, top));
    c.seed = get<std::uint64_t>(j, "seed", top);
    const auto mode = get_or<std::string>(j, "mode", "product_form", top);
    if (mode == "product_form") {
        c.mode = DiscreteAveraging::ProductForm;
    } else if (mode == "stationary") {
        c.mode = DiscreteAveraging::Stationary;
    } else {
        throw ConfigError("mode must be product_form or stationary");
    }
    if (j.contains("observables")) {
        if (!j.at("observables").is_array()) throw ConfigError("observables: expected an array");
        for (std::size_t i = 0; i < j.at("observables").size(); ++i) {
            c.observables.push_back(parse_observable(j.at("observables")[i], i));
        }
    }
    c.marginal_species = get_or<std::vector<std::string>>(j, "marginal_species", {}, top);
    c.expectation = get_or<std::string>(j, "expectation", "poisson", top);
    if (c.expectation != "poisson" && c.expectation != "non_poisson") {
        throw ConfigError("expectation must be poisson or non_poisson");
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        const std::string w = "thresholds";
        check_keys(t, {"path_sup_max", "path_decreasing", "tv_max", "tv_decreasing", "mean_rel_error_max",
                       "residual_max", "residual_decreasing", "tv_best_poisson_min"},
                   w);
        auto& th = c.thresholds;
        th.path_sup_max = opt_double(t, "path_sup_max", w);
        th.path_decreasing = get_or<bool>(t, "path_decreasing", false, w);
        th.tv_max = opt_double(t, "tv_max", w);
        th.tv_decreasing = get_or<bool>(t, "tv_decreasing", false, w);
        th.mean_rel_error_max = opt_double(t, "mean_rel_error_max", w);
        th.residual_max = opt_double(t, "residual_max", w);
        th.residual_decreasing = get_or<bool>(t, "residual_decreasing", false, w);
        th.tv_best_poisson_min = opt_double(t, "tv_best_poisson_min", w);
    }
    if (j.contains("value_check")) {
        const auto& v = j.at("value_check");
        const std::string w = "value_check";
        check_keys(v, {"network", "species", "formula", "alternative", "probe_constants"}, w);
        ValueCheck vc;
        vc.network_file = get<std::string>(v, "network", w);
        vc.species = get<std::string>(v, "species", w);
        vc.formula = get<std::string>(v, "formula", w);
        vc.alternative = get_or<std::string>(v, "alternative", "", w);
        vc.probe_constants = get_or<std::map<std::string, double>>(v, "probe_constants", {}, w);
        c.value_check = vc;
    }
    c.notes = get_or<std::vector<std::string>>(j, "notes", {}, top);
    c.time_budget_minutes = get_or<double>(j, "time_budget_minutes", 0.0, top);
    return c;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_study_config(j, path.parent_path());
}

nlohmann::ordered_json to_json(const StudyConfig& c) {
    nlohmann::ordered_json j;
    j["schema"] = kStudySchema;
    j["name"] = c.name;
    if (!c.description.empty()) j["description"] = c.description;
    j["network"] = c.network_file;
    j["scaling"] = {{"alpha", c.alpha_by_name}, {"x0", c.x0_by_name}, {"N", c.n_grid}};
    j["T"] = c.T;
    j["delta"] = c.delta;
    j["replicas"] = c.replicas;
    j["path_replicas"] = c.path_replicas;
    j["seed"] = c.seed;
    j["mode"] = c.mode == DiscreteAveraging::ProductForm ? "product_form" : "stationary";
    auto obs = nlohmann::ordered_json::array();
    for (const auto& o : c.observables) {
        nlohmann::ordered_json e{{"species", o.species}, {"g", o.g}};
        if (o.g == "indicator") e["set"] = o.set;
        if (o.g == "truncated_second_moment") e["cap"] = o.cap;
        obs.push_back(e);
    }
    j["observables"] = obs;
    j["marginal_species"] = c.marginal_species;
    j["expectation"] = c.expectation;
    auto th = nlohmann::ordered_json::object();
    const auto& t = c.thresholds;
    if (t.path_sup_max) th["path_sup_max"] = *t.path_sup_max;
    if (t.path_decreasing) th["path_decreasing"] = true;
    if (t.tv_max) th["tv_max"] = *t.tv_max;
    if (t.tv_decreasing) th["tv_decreasing"] = true;
    if (t.mean_rel_error_max) th["mean_rel_error_max"] = *t.mean_rel_error_max;
    if (t.residual_max) th["residual_max"] = *t.residual_max;
    if (t.residual_decreasing) th["residual_decreasing"] = true;
    if (t.tv_best_poisson_min) th["tv_best_poisson_min"] = *t.tv_best_poisson_min;
    j["thresholds"] = th;
    if (c.value_check) {
        const auto& v = *c.value_check;
        j["value_check"] = {{"network", v.network_file}, {"species", v.species}, {"formula", v.formula}};
        if (!v.alternative.empty()) j["value_check"]["alternative"] = v.alternative;
        if (!v.probe_constants.empty()) j["value_check"]["probe_constants"] = v.probe_constants;
    }
    if (!c.notes.empty()) j["notes"] = c.notes;
    if (c.time_budget_minutes > 0.0) j["time_budget_minutes"] = c.time_budget_minutes;
    return j;
}

std::string override_constants(const std::string& text, const std::map<std::string, double>& overrides) {
    std::string out = text;
    for (const auto& [name, value] : overrides) {
        const std::regex line("(^|\\n)(\\s*let\\s+" + name + "\\s*=)[^;]*;");
        if (!std::regex_search(out, line)) throw ConfigError("no constant named " + name);
        out = std::regex_replace(out, line, "$1$2 " + format_number(value) + ";");
    }
    return out;
}

double evaluate_constant_formula(const std::filesystem::path& network_file, const std::string& formula,
                                 const std::map<std::string, double>& overrides) {
    std::ifstream in(network_file);
    if (!in) throw ConfigError("cannot read " + network_file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto net = parse_network(override_constants(ss.str(), overrides));
    // A throwaway reaction whose rate constant is the formula.
    std::string doc;
    for (const auto& k : net.constants()) doc += "let " + k.name + " = " + format_number(k.value) + ";\n";
    doc += "Z -> 0 @ ma(" + formula + ")\n";
    try {
        return parse_network(doc).reactions().front().rate_law.kappa();
    } catch (const ParseError& e) {
        throw ConfigError("formula '" + formula + "': " + e.detail());
    }
}

}  // namespace acr
