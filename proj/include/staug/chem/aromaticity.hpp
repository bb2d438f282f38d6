#pragma once

#include "staug/chem/mol_graph.hpp"

namespace staug::chem {

// Assigns Kekule orders to every bond still carrying kAromaticOrder.
// Throws KekulizationError when no alternating assignment exists.
MolGraph kekulize(const MolGraph& g);

// Re-derives aromatic flags from the Kekule structure. A smallest-set ring is
// aromatic when every ring atom can donate pi electrons and the ring's
// count is 4n+2. Contributions:
//   atom with a double bond that lies on a ring ......... 1
//   atom with only an exocyclic double bond ............. 0
//   N/P/As with three connections, neutral .............. 2
//   O/S/Se/Te with two connections, neutral ............. 2
//   carbanion 2, carbocation 0, three-connected boron 0
// Anything else (sp3 carbon, ammonium, triple bonds) cannot be aromatic.
// Fused systems are decided ring by ring. Idempotent.
MolGraph perceive_aromaticity(const MolGraph& g);

} // namespace staug::chem
