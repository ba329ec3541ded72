#pragma once

#include <stdexcept>

#include "nctma/network.hpp"

namespace nctma {

// Thrown when no flow path can be placed after the retry budget; signals
// degenerate generator parameters (e.g. an almost edge-free G(n,p)).
struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Daisy chain 0 -> 1 -> ... -> S-1; each flow covers a uniformly random
// contiguous interval of servers.
Network generateTandem(const GeneratorParams& p);

// Uniform random labeled tree (Pruefer decode), edges oriented toward a
// uniformly drawn root; flows follow root-paths.
Network generateTree(const GeneratorParams& p);

// G(n,p) edges oriented from lower to higher index, which makes any edge set
// acyclic; flow paths are uniform random directed simple paths.
Network generateErdosRenyi(const GeneratorParams& p);

// Dispatch on p.topology.
Network generate(const GeneratorParams& p);

}  // namespace nctma
