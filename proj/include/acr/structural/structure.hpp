#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"

#include "acr/model/network.hpp"
#include "acr/structural/rational.hpp"

namespace acr {

struct StructuralReport {
    std::size_t num_species = 0;
    std::size_t num_complexes = 0;
    /// Complex indices per connected component of the undirected complex
    /// graph, ordered by smallest member.
    std::vector<std::vector<std::size_t>> linkage_classes;
    /// Strongly connected components of the directed complex graph.
    std::vector<std::vector<std::size_t>> strong_components;
    std::size_t stoich_dimension = 0;
    long long deficiency = 0;
    bool weakly_reversible = false;
    /// Primitive integer vectors spanning the left null space of the
    /// stoichiometric matrix.
    RationalMatrix conservation_basis;
    bool conservative = false;
    std::optional<RationalVector> positive_conservation_law;
};

StructuralReport analyze_structure(const ReactionNetwork& net);

/// Exact LP feasibility of T.xi_r = 0 for all r with T_i >= 1.
std::optional<RationalVector> find_positive_conservation_law(const ReactionNetwork& net);

struct Conservativity {
    bool conservative = false;
    std::optional<RationalVector> law;
};
Conservativity is_conservative(const StructuralReport& report);

/// Integer stoichiometric matrix with one row per reaction vector.
RationalMatrix reaction_vector_rows(const ReactionNetwork& net);

/// Basis of span{xi_r} as rows (the reduced row echelon form of the
/// reaction-vector matrix).
RationalMatrix stoichiometric_basis(const ReactionNetwork& net);

nlohmann::ordered_json to_json(const StructuralReport& report, const ReactionNetwork& net);

}  // namespace acr
