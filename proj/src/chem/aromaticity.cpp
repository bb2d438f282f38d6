#include "staug/chem/aromaticity.hpp"

#include "staug/chem/element.hpp"
#include "staug/chem/rings.hpp"

#include "staug/common/error.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace staug::chem {

namespace {

// Lowest valence used to decide whether an aromatic-hinted atom still needs
// a pi double bond.
int pi_valence(const Atom& a)
{
    const auto v = charged_valences(a.element, a.formal_charge);
    if (!v.empty()) {
        return v.front();
    }
    switch (a.element) {
    case elem::Se:
    case elem::Te:
        return 2 + a.formal_charge;
    case elem::As:
        return 3 + a.formal_charge;
    default:
        return 0;
    }
}

bool aromatic_capable_element(int z)
{
    switch (z) {
    case elem::B:
    case elem::C:
    case elem::N:
    case elem::O:
    case elem::P:
    case elem::S:
    case elem::As:
    case elem::Se:
    case elem::Te:
        return true;
    default:
        return false;
    }
}

constexpr int kNotCapable = -1;

int pi_electrons(const MolGraph& g, const std::vector<bool>& ring_bond, int i)
{
    const Atom& a = g.atom(i);
    if (!aromatic_capable_element(a.element)) {
        return kNotCapable;
    }
    int ring_doubles = 0;
    int exo_doubles = 0;
    for (const auto& nb : g.neighbors(i)) {
        const int order = g.bond(nb.bond).order;
        if (order == 3) {
            return kNotCapable;
        }
        if (order == 2) {
            (ring_bond[static_cast<std::size_t>(nb.bond)] ? ring_doubles : exo_doubles) += 1;
        }
    }
    if (ring_doubles > 1) {
        return kNotCapable;
    }
    if (ring_doubles == 1) {
        return 1;
    }
    if (exo_doubles > 0) {
        return 0;
    }
    const int connections = g.degree(i) + a.implicit_h;
    switch (a.element) {
    case elem::C:
        if (a.formal_charge == -1) {
            return 2;
        }
        if (a.formal_charge == 1) {
            return 0;
        }
        return kNotCapable;
    case elem::N:
    case elem::P:
    case elem::As:
        if (a.formal_charge == 0 && connections == 3) {
            return 2;
        }
        if (a.formal_charge == -1 && connections == 2) {
            return 2;
        }
        return kNotCapable;
    case elem::O:
    case elem::S:
    case elem::Se:
    case elem::Te:
        return (a.formal_charge == 0 && connections == 2) ? 2 : kNotCapable;
    case elem::B:
        return (a.formal_charge == 0 && connections == 3) ? 0 : kNotCapable;
    default:
        return kNotCapable;
    }
}

} // namespace

MolGraph kekulize(const MolGraph& g)
{
    const int n = g.atom_count();
    std::vector<bool> needs(static_cast<std::size_t>(n), false);
    bool any = false;
    for (int i = 0; i < n; ++i) {
        bool touches = false;
        for (const auto& nb : g.neighbors(i)) {
            touches |= g.bond(nb.bond).order == kAromaticOrder;
        }
        if (!touches) {
            continue;
        }
        any = true;
        const Atom& a = g.atom(i);
        needs[static_cast<std::size_t>(i)] = explicit_valence(g, i) + a.implicit_h + 1 <= pi_valence(a);
    }
    if (!any) {
        return g;
    }

    std::vector<int> mate(static_cast<std::size_t>(n), -1);
    auto free_partners = [&](int u) {
        int count = 0;
        for (const auto& nb : g.neighbors(u)) {
            const auto v = static_cast<std::size_t>(nb.atom);
            if (g.bond(nb.bond).order == kAromaticOrder && needs[v] && mate[v] < 0) {
                ++count;
            }
        }
        return count;
    };

    long budget = 2'000'000;
    // Most-constrained-first backtracking perfect matching over the
    // atoms that need a pi bond. Aromatic systems contain odd rings, so a
    // bipartite matcher would not do.
    std::function<bool()> solve = [&]() -> bool {
        if (--budget < 0) {
            return false;
        }
        int pick = -1;
        int best = 1 << 30;
        for (int u = 0; u < n; ++u) {
            if (needs[static_cast<std::size_t>(u)] && mate[static_cast<std::size_t>(u)] < 0) {
                const int c = free_partners(u);
                if (c < best) {
                    best = c;
                    pick = u;
                }
            }
        }
        if (pick < 0) {
            return true;
        }
        if (best == 0) {
            return false;
        }
        for (const auto& nb : g.neighbors(pick)) {
            const auto v = static_cast<std::size_t>(nb.atom);
            if (g.bond(nb.bond).order != kAromaticOrder || !needs[v] || mate[v] >= 0) {
                continue;
            }
            mate[static_cast<std::size_t>(pick)] = nb.atom;
            mate[v] = pick;
            if (solve()) {
                return true;
            }
            mate[static_cast<std::size_t>(pick)] = -1;
            mate[v] = -1;
        }
        return false;
    };
    if (!solve()) {
        throw KekulizationError("no alternating single/double assignment exists for the aromatic atoms");
    }

    std::vector<Bond> bonds(g.bonds().begin(), g.bonds().end());
    for (auto& b : bonds) {
        if (b.order == kAromaticOrder) {
            b.order = mate[static_cast<std::size_t>(b.begin)] == b.end ? 2 : 1;
        }
    }
    return MolGraph(std::vector<Atom>(g.atoms().begin(), g.atoms().end()), std::move(bonds));
}

MolGraph perceive_aromaticity(const MolGraph& input)
{
    const MolGraph g = kekulize(input);
    const RingInfo rings = find_rings(g);

    std::vector<Atom> atoms(g.atoms().begin(), g.atoms().end());
    std::vector<Bond> bonds(g.bonds().begin(), g.bonds().end());
    for (auto& a : atoms) {
        a.aromatic = false;
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        atoms[i].ring_member = rings.ring_atom[i];
    }
    for (auto& b : bonds) {
        b.aromatic = false;
    }

    std::vector<int> contribution(atoms.size());
    for (int i = 0; i < g.atom_count(); ++i) {
        contribution[static_cast<std::size_t>(i)] = pi_electrons(g, rings.ring_bond, i);
    }
    for (const auto& ring : rings.rings) {
        int electrons = 0;
        bool capable = true;
        for (int a : ring.atoms) {
            const int c = contribution[static_cast<std::size_t>(a)];
            if (c == kNotCapable) {
                capable = false;
                break;
            }
            electrons += c;
        }
        if (!capable || electrons % 4 != 2) {
            continue;
        }
        for (int a : ring.atoms) {
            atoms[static_cast<std::size_t>(a)].aromatic = true;
        }
        for (int b : ring.bonds) {
            bonds[static_cast<std::size_t>(b)].aromatic = true;
        }
    }
    return MolGraph(std::move(atoms), std::move(bonds));
}

} // namespace staug::chem
