#pragma once

#include "staug/chem/mol_graph.hpp"

namespace staug::chem {

enum class AdmitReason { Admitted, SingleHeavyAtom, MetalOrOther };

// Dataset admission: at least two heavy atoms, and only organic-set elements
// unless allow_metals (used for the solubility task).
AdmitReason admit_reason(const MolGraph& g, bool allow_metals);

inline bool admit_molecule(const MolGraph& g, bool allow_metals)
{
    return admit_reason(g, allow_metals) == AdmitReason::Admitted;
}

const char* to_string(AdmitReason r);

} // namespace staug::chem
