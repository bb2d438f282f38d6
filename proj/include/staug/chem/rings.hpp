#pragma once

#include "staug/chem/mol_graph.hpp"

#include <vector>

namespace staug::chem {

struct Ring {
    std::vector<int> atoms; // in cycle order
    std::vector<int> bonds;
    int size() const { return static_cast<int>(atoms.size()); }
};

struct RingInfo {
    // Smallest set of smallest rings (a minimum cycle basis). The multiset of
    // ring sizes is the same for every minimum basis of the graph.
    std::vector<Ring> rings;
    // bond lies on some cycle (i.e. is not a bridge)
    std::vector<bool> ring_bond;
    std::vector<bool> ring_atom;
    // Cyclomatic number m - n + c.
    int cyclomatic = 0;
};

RingInfo find_rings(const MolGraph& g);

// Bridges via DFS low-link; true entries mark ring bonds.
std::vector<bool> ring_bonds(const MolGraph& g);

} // namespace staug::chem
