#include "acr/structural/structure.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace acr {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Tarjan's algorithm, iterative to stay safe on long reaction chains.
std::vector<std::vector<std::size_t>> tarjan(const std::vector<std::vector<std::size_t>>& adj) {
    const std::size_t n = adj.size();
    const std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    std::size_t counter = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, edge] = call.back();
            if (edge < adj[v].size()) {
                const std::size_t w = adj[v][edge++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
            const std::size_t finished = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

RationalMatrix reaction_vector_rows(const ReactionNetwork& net) {
    RationalMatrix rows;
    for (const auto& r : net.reactions()) {
        RationalVector row;
        for (auto c : r.reaction_vector) row.emplace_back(c);
        rows.push_back(std::move(row));
    }
    return rows;
}

RationalMatrix stoichiometric_basis(const ReactionNetwork& net) {
    RationalMatrix rows = reaction_vector_rows(net);
    const auto pivots = rref(rows);
    rows.resize(pivots.size());
    return rows;
}

StructuralReport analyze_structure(const ReactionNetwork& net) {
    StructuralReport rep;
    rep.num_species = net.num_species();
    rep.num_complexes = net.complexes().size();

    DisjointSets sets(rep.num_complexes);
    std::vector<std::vector<std::size_t>> adj(rep.num_complexes);
    for (const auto& r : net.reactions()) {
        sets.unite(r.source_complex, r.product_complex);
        adj[r.source_complex].push_back(r.product_complex);
    }
    std::vector<std::vector<std::size_t>> classes;
    std::vector<std::size_t> slot(rep.num_complexes, static_cast<std::size_t>(-1));
    for (std::size_t c = 0; c < rep.num_complexes; ++c) {
        const std::size_t root = sets.find(c);
        if (slot[root] == static_cast<std::size_t>(-1)) {
            slot[root] = classes.size();
            classes.emplace_back();
        }
        classes[slot[root]].push_back(c);
    }
    rep.linkage_classes = std::move(classes);
    rep.strong_components = tarjan(adj);
    // Each linkage class is a union of strong components; equality of counts
    // means every class is strongly connected.
    rep.weakly_reversible = rep.strong_components.size() == rep.linkage_classes.size();

    const RationalMatrix rows = reaction_vector_rows(net);
    rep.stoich_dimension = rank(rows);
    rep.deficiency = static_cast<long long>(rep.num_complexes) -
                     static_cast<long long>(rep.linkage_classes.size()) -
                     static_cast<long long>(rep.stoich_dimension);
    rep.conservation_basis = null_space(rows, rep.num_species);
    rep.positive_conservation_law = find_positive_conservation_law(net);
    rep.conservative = rep.positive_conservation_law.has_value();
    return rep;
}

std::optional<RationalVector> find_positive_conservation_law(const ReactionNetwork& net) {
    // T = u + 1 with u >= 0:  xi_r . u = -xi_r . 1.
    const RationalMatrix rows = reaction_vector_rows(net);
    const std::size_t n = net.num_species();
    RationalVector rhs;
    for (const auto& row : rows) {
        Rational s = 0;
        for (const auto& e : row) s -= e;
        rhs.push_back(s);
    }
    RationalVector u(n, 0);
    if (!feasible_nonnegative(rows, rhs, u)) return std::nullopt;
    for (auto& e : u) e += 1;
    return primitive(std::move(u));
}

Conservativity is_conservative(const StructuralReport& report) {
    return {report.conservative, report.positive_conservation_law};
}

nlohmann::ordered_json to_json(const StructuralReport& rep, const ReactionNetwork& net) {
    using nlohmann::ordered_json;
    auto complex_names = [&](const std::vector<std::size_t>& ids) {
        ordered_json arr = ordered_json::array();
        for (auto c : ids) arr.push_back(net.complex_to_string(net.complexes()[c]));
        return arr;
    };
    auto vec_json = [](const RationalVector& v) {
        ordered_json arr = ordered_json::array();
        for (const auto& e : v) {
            if (denominator(e) == 1) {
                arr.push_back(numerator(e).convert_to<long long>());
            } else {
                arr.push_back(to_string(e));
            }
        }
        return arr;
    };

    ordered_json j;
    ordered_json species = ordered_json::array();
    for (const auto& s : net.species()) species.push_back(s.name);
    j["species"] = species;
    ordered_json complexes = ordered_json::array();
    for (const auto& c : net.complexes()) complexes.push_back(net.complex_to_string(c));
    j["complexes"] = complexes;
    j["num_complexes"] = rep.num_complexes;
    j["num_linkage_classes"] = rep.linkage_classes.size();
    ordered_json lc = ordered_json::array();
    for (const auto& cls : rep.linkage_classes) lc.push_back(complex_names(cls));
    j["linkage_classes"] = lc;
    j["stoich_dimension"] = rep.stoich_dimension;
    j["deficiency"] = rep.deficiency;
    j["weakly_reversible"] = rep.weakly_reversible;
    ordered_json basis = ordered_json::array();
    for (const auto& v : rep.conservation_basis) basis.push_back(vec_json(v));
    j["conservation_basis"] = basis;
    j["conservative"] = rep.conservative;
    j["positive_conservation_law"] =
        rep.positive_conservation_law ? vec_json(*rep.positive_conservation_law) : ordered_json();
    return j;
}

}  // namespace acr
