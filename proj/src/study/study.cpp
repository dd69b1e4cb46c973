#include "acr/study/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "acr/dynamics/ssa.hpp"
#include "acr/equilibria/equilibrium.hpp"
#include "acr/model/expression.hpp"
#include "acr/model/parser.hpp"
#include "acr/multiscale/audit.hpp"
#include "acr/multiscale/symbolic.hpp"
#include "acr/statistics/stationary.hpp"
#include "acr/structural/structure.hpp"
#include "acr/util/error.hpp"

namespace acr {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::size_t kKeptFailures = 5;

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::size_t position_in(const std::vector<std::size_t>& list, std::size_t value) {
    return static_cast<std::size_t>(std::find(list.begin(), list.end(), value) - list.begin());
}

// Reference laws of the discrete species along z(t).
class ReferenceModel {
public:
    ReferenceModel(const DiscreteReduction& d, DiscreteAveraging mode, const OdeSolution* z)
        : d_(d), mode_(mode), z_(z) {}

    std::vector<double> w_at(double t) const {
        if (!z_) return {};
        return z_->evaluate(std::min(t, z_->t_end()));
    }

    /// Law of the discrete coordinates `positions` (indices into X_d) at t.
    std::unique_ptr<Reference> at(double t, const std::vector<std::size_t>& positions) const {
        const auto w = w_at(t);
        if (mode_ == DiscreteAveraging::ProductForm) {
            const auto eq = d_.equilibrium(w);
            if (!eq.found || !eq.balanced) {
                throw AssumptionViolation("no complex-balanced q_d^w along z(t) at t = " + format_number(t));
            }
            std::vector<double> q;
            for (std::size_t p : positions) q.push_back(eq.q[p]);
            return std::make_unique<PoissonReference>(q);
        }
        const auto mu = truncated_stationary(d_.network_at(w));
        std::map<std::vector<Count>, double> projected;
        for (std::size_t i = 0; i < mu.states.size(); ++i) {
            std::vector<Count> s;
            for (std::size_t p : positions) s.push_back(mu.states[i][p]);
            projected[s] += mu.probabilities[i];
        }
        std::vector<std::vector<Count>> states;
        std::vector<double> probs;
        for (auto& [s, p] : projected) {
            states.push_back(s);
            probs.push_back(p);
        }
        return std::make_unique<TabularReference>(std::move(states), std::move(probs));
    }

private:
    const DiscreteReduction& d_;
    DiscreteAveraging mode_;
    const OdeSolution* z_;
};

double reference_expectation(const Reference& ref, const ObservableSpec& g) {
    double sum = 0.0;
    for (const auto& s : ref.support()) sum += ref.pmf(s) * g(s[0]);
    return sum;
}

struct ReplicaResult {
    bool ok = false;
    std::string error;
    std::uint64_t events = 0;
    bool absorbed = false;
    double path = NAN;
    std::vector<double> residuals;
    std::vector<std::vector<Count>> samples;
};

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

std::string short_number(double v) { return fmt::format("{:.4g}", v); }

std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + short_number(v[i]);
    return s;
}

ojson distance_json(const DistanceReport& d) {
    return {{"tv", d.total_variation},
            {"chi_square", number_or_null(d.chi_square)},
            {"dof", d.degrees_of_freedom},
            {"chi_square_pvalue", d.chi_square_pvalue},
            {"mean_error", d.mean_error},
            {"degenerate", d.degenerate}};
}

ojson run_value_check(const StudyConfig& config, std::uint64_t seed) {
    const auto& vc = *config.value_check;
    const auto path = config.resolve(vc.network_file);
    auto solve = [&](const std::map<std::string, double>& overrides) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        const auto net = parse_network(override_constants(ss.str(), overrides));
        const auto idx = net.species_index(vc.species);
        if (!idx) throw ConfigError("value_check: unknown species " + vc.species);
        AcrOptions opt;
        opt.seed = seed;
        const auto rep = detect_acr(net, opt);
        const auto it = rep.acr_values.find(*idx);
        ojson j;
        j["solver_value"] = it == rep.acr_values.end() ? ojson(nullptr) : ojson(it->second);
        j["acr"] = it != rep.acr_values.end();
        const double f = evaluate_constant_formula(path, vc.formula, overrides);
        j["formula_value"] = f;
        bool formula_ok = false, alt_ok = false;
        if (it != rep.acr_values.end()) formula_ok = std::abs(f - it->second) <= 1e-6 * it->second;
        j["formula_consistent"] = formula_ok;
        if (!vc.alternative.empty()) {
            const double a = evaluate_constant_formula(path, vc.alternative, overrides);
            j["alternative_value"] = a;
            if (it != rep.acr_values.end()) alt_ok = std::abs(a - it->second) <= 1e-6 * it->second;
            j["alternative_consistent"] = alt_ok;
        }
        return j;
    };
    ojson out;
    out["network"] = vc.network_file;
    out["species"] = vc.species;
    out["formula"] = vc.formula;
    if (!vc.alternative.empty()) out["alternative"] = vc.alternative;
    out["at_study_constants"] = solve({});
    if (!vc.probe_constants.empty()) {
        out["probe_constants"] = vc.probe_constants;
        out["at_probe_constants"] = solve(vc.probe_constants);
    }
    return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

}  // namespace

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool StudyResult::verdict() const {
    return !all_failed_at_some_n &&
           std::all_of(checks.begin(), checks.end(), [](const StudyCheck& c) { return c.passed; });
}

StudyResult run_study(const StudyConfig& config, const StudyOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    StudyResult res;
    res.config = config;
    if (options.seed) res.config.seed = *options.seed;
    if (options.remark_3_7) res.config.mode = DiscreteAveraging::Stationary;
    const auto& cfg = res.config;
    res.n_grid = cfg.n_grid;

    const auto net = cfg.load_network();
    const auto spec = cfg.scaling(net);
    LimitKinetics kinetics(net, spec.alpha);
    check_expression_scaling(kinetics);
    const DiscreteReduction d(kinetics);

    res.structure = to_json(analyze_structure(net), net);
    if (net.all_mass_action()) {
        AcrOptions acr_opt;
        acr_opt.seed = cfg.seed;
        res.acr = to_json(detect_acr(net, acr_opt), net);
    } else {
        res.acr = {{"skipped", "expression kinetics; see value_check"}};
    }
    AuditOptions audit_opt;
    audit_opt.mode = cfg.mode;
    res.audit = to_json(audit_assumptions(d, spec.x0, cfg.T, audit_opt));
    if (cfg.value_check) res.value_check = run_value_check(cfg, cfg.seed);

    const ContinuousReduction cont(d, cfg.mode);
    res.reduction = reduction_text(d, &cont, cfg.mode);

    std::optional<OdeSolution> z;
    if (!d.continuous().empty()) {
        OdeOptions ode;
        ode.min_samples_per_step = 8;
        z = integrate_ode(cont.rhs(), cont.initial_state(spec.x0), cfg.T, ode);
    }
    const ReferenceModel refs(d, cfg.mode, z ? &*z : nullptr);

    // Marginal and observable species as positions in X_d.
    const auto names = net.species();
    auto discrete_position = [&](const std::string& name, const std::string& where) {
        const auto idx = net.species_index(name);
        if (!idx) throw ConfigError(where + ": unknown species " + name);
        const std::size_t p = position_in(d.species(), *idx);
        if (p == d.species().size()) throw ConfigError(where + ": " + name + " is not a discrete species");
        return p;
    };
    res.marginal_species = cfg.marginal_species;
    if (res.marginal_species.empty()) {
        for (std::size_t s : d.species()) res.marginal_species.push_back(names[s].name);
    }
    if (res.marginal_species.empty()) throw ConfigError("study needs at least one discrete species");
    std::vector<std::size_t> marginal_pos, marginal_base;
    for (const auto& n : res.marginal_species) {
        marginal_pos.push_back(discrete_position(n, "marginal_species"));
        marginal_base.push_back(d.species()[marginal_pos.back()]);
    }
    std::vector<std::size_t> obs_pos;
    for (const auto& o : cfg.observables) obs_pos.push_back(discrete_position(o.species, "observables"));

    res.sample_times = {cfg.delta, 0.5 * cfg.T, cfg.T};
    res.sample_times.erase(std::unique(res.sample_times.begin(), res.sample_times.end()),
                           res.sample_times.end());

    // Reference curves s -> E[g(J^{z(s)})] integrated once for all N.
    const std::size_t cells = cfg.mode == DiscreteAveraging::ProductForm ? 500 : 100;
    std::vector<std::unique_ptr<CumulativeCurve>> curves;
    for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
        const auto& g = cfg.observables[k];
        const std::vector<std::size_t> pos{obs_pos[k]};
        curves.push_back(std::make_unique<CumulativeCurve>(
            [&](double s) { return reference_expectation(*refs.at(s, pos), g); }, cfg.T, cells));
    }
    std::vector<std::unique_ptr<Reference>> fixed_refs;
    for (double t : res.sample_times) fixed_refs.push_back(refs.at(t, marginal_pos));

    const std::size_t threads =
        options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    for (long long N : cfg.n_grid) {
        const auto sys = build_scaled_system(net, spec, N);
        const SsaSimulator sim(sys.network);
        const std::uint64_t master = mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(N)));
        SsaOptions ssa_opt;
        ssa_opt.N = N;
        spdlog::info("{}: N = {}, {} replicas on {} thread(s)", cfg.name, N, cfg.replicas, threads);
        std::vector<ReplicaResult> reps(cfg.replicas);
        parallel_for(cfg.replicas, threads, [&](std::size_t i) {
            auto& r = reps[i];
            FixedTimeObserver fixed(marginal_base, res.sample_times);
            std::vector<std::unique_ptr<RunningResidualObserver>> resid;
            std::vector<SsaObserver*> obs{&fixed};
            for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
                const auto g = cfg.observables[k];
                resid.push_back(std::make_unique<RunningResidualObserver>(
                    std::vector<std::size_t>{d.species()[obs_pos[k]]},
                    [g](std::span<const Count> v) { return g(v[0]); }, *curves[k]));
                obs.push_back(resid.back().get());
            }
            std::unique_ptr<PathDistanceObserver> path;
            if (z && i < cfg.path_replicas) {
                path = std::make_unique<PathDistanceObserver>(*z, d.continuous(), static_cast<double>(N));
                obs.push_back(path.get());
            }
            try {
                auto rng = Philox::for_replica(master, i);
                const auto run = sim.run(sys.initial_state, cfg.T, rng, obs, ssa_opt);
                r.ok = true;
                r.events = run.events;
                r.absorbed = run.absorbed;
                if (path) r.path = path->distance();
                for (const auto& o : resid) r.residuals.push_back(o->residual());
                r.samples = fixed.samples();
            } catch (const Error& e) {
                r.error = e.what();
            }
        });

        NStats st;
        st.N = N;
        st.residuals.assign(cfg.observables.size(), {});
        std::vector<EmpiricalMarginal> marginals(res.sample_times.size());
        for (std::size_t k = 0; k < marginals.size(); ++k) marginals[k].t = res.sample_times[k];
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const auto& r = reps[i];
            if (!r.ok) {
                ++st.failed;
                if (st.failures.size() < kKeptFailures) st.failures.push_back("replica " + std::to_string(i) + ": " + r.error);
                continue;
            }
            ++st.completed;
            st.events += r.events;
            st.absorbed += r.absorbed ? 1 : 0;
            if (i < cfg.path_replicas && z) st.path_distances.push_back(r.path);
            for (std::size_t k = 0; k < r.residuals.size(); ++k) st.residuals[k].push_back(r.residuals[k]);
            for (std::size_t k = 0; k < r.samples.size(); ++k) marginals[k].add(r.samples[k]);
        }
        if (st.completed == 0) {
            res.all_failed_at_some_n = true;
            spdlog::error("{}: every replica failed at N = {}", cfg.name, N);
        }
        st.path_median = median(st.path_distances);
        for (const auto& rv : st.residuals) st.residual_medians.push_back(median(rv));
        for (std::size_t k = 0; k < marginals.size() && st.completed > 0; ++k) {
            FixedTimeStats f;
            f.t = res.sample_times[k];
            f.marginal = marginals[k];
            f.reference_means = fixed_refs[k]->means();
            f.reference = poisson_distance(f.marginal, *fixed_refs[k]);
            f.best_fit = poisson_distance(f.marginal, PoissonReference(f.marginal.means()),
                                          static_cast<int>(marginal_pos.size()));
            for (std::size_t o = 0; o < cfg.observables.size(); ++o) {
                const auto& g = cfg.observables[o];
                if (!g.bounded()) continue;
                const auto ref1 = refs.at(f.t, {obs_pos[o]});
                const auto mpos = position_in(marginal_pos, obs_pos[o]);
                double emp = NAN;
                if (mpos < marginal_pos.size()) {
                    emp = f.marginal.expectation([&](std::span<const Count> v) { return g(v[mpos]); });
                }
                f.observable_errors.emplace_back(g.label(), std::abs(emp - reference_expectation(*ref1, g)));
            }
            st.fixed.push_back(std::move(f));
        }

        if (!options.out_dir.empty()) {
            const auto dir = options.out_dir / ("N" + std::to_string(N));
            std::filesystem::create_directories(dir);
            std::ostringstream csv;
            csv << "replica,status,events,absorbed,path_distance";
            for (const auto& o : cfg.observables) csv << ",residual[" << o.label() << "]";
            for (double t : res.sample_times) {
                for (const auto& n : res.marginal_species) csv << ',' << n << "@" << format_number(t);
            }
            csv << '\n';
            for (std::size_t i = 0; i < reps.size(); ++i) {
                const auto& r = reps[i];
                csv << i << ',' << (r.ok ? "ok" : "failed") << ',' << r.events << ',' << r.absorbed << ',';
                if (std::isfinite(r.path)) csv << format_number(r.path);
                for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
                    csv << ',';
                    if (r.ok) csv << format_number(r.residuals[k]);
                }
                for (std::size_t k = 0; k < res.sample_times.size(); ++k) {
                    for (std::size_t m = 0; m < marginal_pos.size(); ++m) {
                        csv << ',';
                        if (r.ok) csv << r.samples[k][m];
                    }
                }
                csv << '\n';
            }
            write_text(dir / "replicas.csv", csv.str());

            std::ostringstream mcsv;
            mcsv << "t";
            for (const auto& n : res.marginal_species) mcsv << ',' << n;
            mcsv << ",count,empirical,reference\n";
            for (std::size_t k = 0; k < st.fixed.size(); ++k) {
                const auto& f = st.fixed[k];
                for (const auto& [s, c] : f.marginal.histogram) {
                    mcsv << format_number(f.t);
                    for (Count v : s) mcsv << ',' << v;
                    mcsv << ',' << c << ',' << format_number(double(c) / double(f.marginal.replicas)) << ','
                         << format_number(fixed_refs[k]->pmf(s)) << '\n';
                }
            }
            write_text(dir / "marginals.csv", mcsv.str());
        }
        res.per_n.push_back(std::move(st));
    }

    // Verdict checks at the largest N and t = T.
    const auto& th = cfg.thresholds;
    const auto& last = res.per_n.back();
    std::vector<double> paths, tvs, resid;
    for (const auto& s : res.per_n) {
        paths.push_back(s.path_median);
        tvs.push_back(s.fixed.empty() ? NAN : s.fixed.back().reference.total_variation);
        resid.push_back(s.residual_medians.empty() ? NAN : s.residual_medians.front());
    }
    auto add = [&](std::string name, bool ok, std::string detail) {
        res.checks.push_back({std::move(name), ok, std::move(detail)});
    };
    const std::string at_n = " at N = " + std::to_string(last.N);
    auto bound = [&](double v, const char* rel, double limit) {
        return short_number(v) + at_n + " (" + rel + " " + short_number(limit) + ")";
    };
    if (th.path_sup_max) {
        add("path_sup_max", last.path_median < *th.path_sup_max,
            "median sup distance " + bound(last.path_median, "max", *th.path_sup_max));
    }
    if (th.path_decreasing) {
        add("path_decreasing", strictly_decreasing(paths), "medians over N: " + join_numbers(paths));
    }
    if (!last.fixed.empty()) {
        const auto& f = last.fixed.back();
        if (th.tv_max) {
            add("tv_max", f.reference.total_variation < *th.tv_max,
                "TV to reference at t = T " + bound(f.reference.total_variation, "max", *th.tv_max));
        }
        if (th.mean_rel_error_max) {
            add("mean_rel_error_max", f.reference.mean_error < *th.mean_rel_error_max,
                "relative mean error " + bound(f.reference.mean_error, "max", *th.mean_rel_error_max));
        }
        if (th.tv_best_poisson_min) {
            add("tv_best_poisson_min", f.best_fit.total_variation > *th.tv_best_poisson_min,
                "TV to best-fit Poisson " + bound(f.best_fit.total_variation, "min", *th.tv_best_poisson_min));
        }
    }
    if (th.tv_decreasing) add("tv_decreasing", strictly_decreasing(tvs), "TV at t = T over N: " + join_numbers(tvs));
    if (th.residual_max && !last.residual_medians.empty()) {
        add("residual_max", last.residual_medians.front() < *th.residual_max,
            "median running-integral residual " + bound(last.residual_medians.front(), "max", *th.residual_max));
    }
    if (th.residual_decreasing) {
        add("residual_decreasing", strictly_decreasing(resid), "medians over N: " + join_numbers(resid));
    }

    if (!options.out_dir.empty()) {
        std::filesystem::create_directories(options.out_dir);
        write_text(options.out_dir / "statistics.json", res.to_json().dump(2) + "\n");
        write_text(options.out_dir / "summary.md", render_summary(res.to_json()));
        if (z) z->export_csv((options.out_dir / "ode.csv").string(), cont.species_names(), 1001);
    }
    const double minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() / 60.0;
    spdlog::info("{}: finished in {:.2f} min, verdict {}", cfg.name, minutes, res.verdict() ? "PASS" : "FAIL");
    if (cfg.time_budget_minutes > 0.0 && minutes > cfg.time_budget_minutes) {
        spdlog::warn("{}: exceeded the documented budget of {} min", cfg.name, cfg.time_budget_minutes);
    }
    return res;
}

ojson StudyResult::to_json() const {
    ojson j;
    j["schema"] = "acr-scope/statistics/1";
    j["study"] = config.name;
    j["config"] = acr::to_json(config);
    j["structure"] = structure;
    j["acr"] = acr;
    j["audit"] = audit;
    if (!value_check.is_null()) j["value_check"] = value_check;
    j["reduction"] = reduction;
    j["marginal_species"] = marginal_species;
    j["sample_times"] = sample_times;
    auto labels = ojson::array();
    for (const auto& o : config.observables) labels.push_back(o.label());
    j["observables"] = labels;
    auto results = ojson::array();
    for (const auto& s : per_n) {
        ojson r;
        r["N"] = s.N;
        r["replicas"] = {{"completed", s.completed}, {"failed", s.failed}, {"failures", s.failures}};
        r["events"] = s.events;
        r["absorbed"] = s.absorbed;
        r["path_sup_distance"] = {{"median", number_or_null(s.path_median)},
                                  {"replicas", s.path_distances.size()}};
        auto ta = ojson::array();
        for (std::size_t k = 0; k < s.residual_medians.size(); ++k) {
            ta.push_back({{"observable", labels[k]}, {"median_residual", number_or_null(s.residual_medians[k])}});
        }
        r["time_average"] = ta;
        auto ft = ojson::array();
        for (const auto& f : s.fixed) {
            ojson e;
            e["t"] = f.t;
            e["reference_means"] = f.reference_means;
            e["empirical_means"] = f.marginal.means();
            e["reference"] = distance_json(f.reference);
            e["best_fit_poisson"] = distance_json(f.best_fit);
            auto oe = ojson::array();
            for (const auto& [label, err] : f.observable_errors) {
                oe.push_back({{"observable", label}, {"abs_error", number_or_null(err)}});
            }
            e["bounded_observables"] = oe;
            ft.push_back(e);
        }
        r["fixed_time"] = ft;
        results.push_back(r);
    }
    j["results"] = results;
    auto checks_j = ojson::array();
    for (const auto& c : checks) checks_j.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks_j;
    j["all_failed_at_some_n"] = all_failed_at_some_n;
    j["verdict"] = verdict() ? "PASS" : "FAIL";
    return j;
}

namespace {

std::string fmt_num(const ojson& v, int digits = 4) {
    if (v.is_null()) return "n/a";
    std::ostringstream ss;
    ss.precision(digits);
    ss << v.get<double>();
    return ss.str();
}

}  // namespace

std::string render_summary(const ojson& s) {
    std::ostringstream md;
    const auto& cfg = s.at("config");
    const bool non_poisson = cfg.value("expectation", "poisson") == "non_poisson";
    md << "# Study: " << s.at("study").get<std::string>() << "\n\n";
    if (cfg.contains("description")) md << cfg.at("description").get<std::string>() << "\n\n";
    md << "- network: `" << cfg.at("network").get<std::string>() << "`\n";
    md << "- N grid: " << cfg.at("scaling").at("N").dump() << ", T = " << fmt_num(cfg.at("T"))
       << ", delta = " << fmt_num(cfg.at("delta")) << "\n";
    md << "- replicas per N: " << cfg.at("replicas").get<std::size_t>()
       << " (path distance on the first " << cfg.at("path_replicas").get<std::size_t>() << ")\n";
    md << "- seed: " << cfg.at("seed").get<std::uint64_t>() << ", discrete averaging: "
       << cfg.at("mode").get<std::string>() << "\n\n";

    md << "## Verdict\n\n**" << s.at("verdict").get<std::string>() << "**";
    if (non_poisson && s.at("verdict") == "PASS") md << " (non-Poisson as predicted)";
    md << "\n\n";
    for (const auto& c : s.at("checks")) {
        md << "- [" << (c.at("passed").get<bool>() ? "x" : " ") << "] " << c.at("name").get<std::string>()
           << ": " << c.at("detail").get<std::string>() << "\n";
    }
    md << "\n## Assumption audit\n\n| check | status | detail |\n|---|---|---|\n";
    for (const auto& [name, c] : s.at("audit").items()) {
        if (name == "all_pass") continue;
        md << "| " << name << " | " << c.at("status").get<std::string>() << " | "
           << c.at("detail").get<std::string>() << " |\n";
    }
    md << "\n## Reduction\n\n```\n" << s.at("reduction").get<std::string>() << "```\n\n";

    if (s.at("acr").contains("acr_species")) {
        md << "## ACR (numerical evidence)\n\n```json\n" << s.at("acr").at("acr_values").dump() << "\n```\n\n";
    }

    if (s.contains("value_check")) {
        const auto& v = s.at("value_check");
        const auto& a = v.at("at_study_constants");
        md << "## Equilibrium value of " << v.at("species").get<std::string>() << "\n\n";
        md << "Solver on `" << v.at("network").get<std::string>() << "`: " << fmt_num(a.at("solver_value"), 10)
           << ". Expression `" << v.at("formula").get<std::string>() << "` = " << fmt_num(a.at("formula_value"), 10)
           << (a.at("formula_consistent").get<bool>() ? " (agrees)" : " (disagrees)") << ".\n";
        if (v.contains("alternative")) {
            md << "\n**Note on a conflicting expression.** The alternative `" << v.at("alternative").get<std::string>()
               << "` places k0 in the numerator instead of the denominator. At the study constants it evaluates to "
               << fmt_num(a.at("alternative_value"), 10);
            if (v.contains("at_probe_constants")) {
                const auto& p = v.at("at_probe_constants");
                md << "; with " << v.at("probe_constants").dump() << " the solver gives "
                   << fmt_num(p.at("solver_value"), 10) << ", the study expression "
                   << fmt_num(p.at("formula_value"), 10) << " and the alternative "
                   << fmt_num(p.at("alternative_value"), 10);
            }
            md << ". This study uses the solver-confirmed expression.\n";
        }
        md << "\n";
    }

    md << "## Convergence over N\n\n";
    md << "| N | completed | failed | median sup path distance |";
    for (const auto& o : s.at("observables")) md << " median residual " << o.get<std::string>() << " |";
    md << " TV to reference (t = T) | chi-square p | mean error | TV to best-fit Poisson |\n|---|---|---|---|";
    for (std::size_t i = 0; i < s.at("observables").size(); ++i) md << "---|";
    md << "---|---|---|---|\n";
    for (const auto& r : s.at("results")) {
        md << "| " << r.at("N").get<long long>() << " | " << r.at("replicas").at("completed").get<std::size_t>()
           << " | " << r.at("replicas").at("failed").get<std::size_t>() << " | "
           << fmt_num(r.at("path_sup_distance").at("median")) << " |";
        for (const auto& t : r.at("time_average")) md << " " << fmt_num(t.at("median_residual")) << " |";
        if (r.at("fixed_time").empty()) {
            md << " n/a | n/a | n/a | n/a |\n";
            continue;
        }
        const auto& f = r.at("fixed_time").back();
        md << " " << fmt_num(f.at("reference").at("tv")) << " | " << fmt_num(f.at("reference").at("chi_square_pvalue"))
           << " | " << fmt_num(f.at("reference").at("mean_error")) << " | "
           << fmt_num(f.at("best_fit_poisson").at("tv")) << " |\n";
    }
    md << "\nFixed-time marginals of " << s.at("marginal_species").dump() << " at t in "
       << s.at("sample_times").dump() << "; TV is the primary metric, chi-square is advisory.\n";

    if (cfg.contains("notes")) {
        md << "\n## Notes\n\n";
        for (const auto& n : cfg.at("notes")) md << "- " << n.get<std::string>() << "\n";
    }
    return md.str();
}

}  // namespace acr
