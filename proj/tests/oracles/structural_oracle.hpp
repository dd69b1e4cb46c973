#pragma once

// Brute-force reference implementations used only by the tests. They share
// no code with the library's structural module beyond the network type.

#include <cstddef>
#include <vector>

#include "acr/model/network.hpp"

namespace oracle {

struct Structure {
    std::size_t linkage_classes = 0;
    std::size_t rank = 0;
    long long deficiency = 0;
    bool weakly_reversible = false;
};

/// Linkage classes and weak reversibility by Warshall transitive closure;
/// rank as the size of the largest non-vanishing minor (exact integers).
Structure brute_force_structure(const acr::ReactionNetwork& net);

/// True when every vector annihilates every reaction vector exactly.
bool annihilates(const acr::ReactionNetwork& net,
                 const std::vector<std::vector<long long>>& laws);

}  // namespace oracle
