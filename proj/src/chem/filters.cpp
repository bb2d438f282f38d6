#include "staug/chem/filters.hpp"

#include "staug/chem/element.hpp"

namespace staug::chem {

AdmitReason admit_reason(const MolGraph& g, bool allow_metals)
{
    if (g.heavy_atom_count() < 2) {
        return AdmitReason::SingleHeavyAtom;
    }
    if (!allow_metals) {
        for (const auto& a : g.atoms()) {
            if (!is_organic(a.element)) {
                return AdmitReason::MetalOrOther;
            }
        }
    }
    return AdmitReason::Admitted;
}

const char* to_string(AdmitReason r)
{
    switch (r) {
    case AdmitReason::Admitted:
        return "admitted";
    case AdmitReason::SingleHeavyAtom:
        return "single-heavy-atom";
    case AdmitReason::MetalOrOther:
        return "metal-or-other-element";
    }
    return "unknown";
}

} // namespace staug::chem
