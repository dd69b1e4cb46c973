#pragma once

#include <string>
#include <string_view>

#include "acr/model/network.hpp"

namespace acr {

/// Parses the reaction DSL:
///
///     # comment
///     let k1 = 1.0;
///     A + B -> 2B @ ma(k1)
///     B <-> C @ ma(k2, k3)
///     A + 2B -> 3B @ expr(k0 * x[A] * x[B] * (x[B] - 1) / (1 + x[B])) scale N^0 limit expr(k0 * x[A] * x[B])
///
/// One reaction per line; `<->` expands into a forward and a backward
/// reaction. Throws ParseError with line and column on any failure.
ReactionNetwork parse_network(std::string_view text);

/// Reads and parses a file; I/O failures surface as ParseError at line 0.
ReactionNetwork parse_network_file(const std::string& path);

/// Canonical DSL text. Reversible pairs are emitted as two `->` lines so that
/// reparsing reproduces the same reaction order.
std::string print_network(const ReactionNetwork& net);

}  // namespace acr
