#include "staug/chem/mol_graph.hpp"

#include "staug/common/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace staug::chem {

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), adjacency_(atoms_.size())
{
    const int n = atom_count();
    for (int b = 0; b < bond_count(); ++b) {
        auto& bond = bonds_[static_cast<std::size_t>(b)];
        if (bond.begin < 0 || bond.end < 0 || bond.begin >= n || bond.end >= n) {
            throw PreconditionError("bond " + std::to_string(b) + " endpoint out of range");
        }
        if (bond.begin == bond.end) {
            throw PreconditionError("bond " + std::to_string(b) + " is a self loop");
        }
        if (bond.order < kAromaticOrder || bond.order > 3) {
            throw PreconditionError("bond " + std::to_string(b) + " has invalid order");
        }
        adjacency_[static_cast<std::size_t>(bond.begin)].push_back({bond.end, b});
        adjacency_[static_cast<std::size_t>(bond.end)].push_back({bond.begin, b});
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) { return x.atom < y.atom; });
        for (std::size_t k = 1; k < list.size(); ++k) {
            if (list[k].atom == list[k - 1].atom) {
                throw PreconditionError("duplicate bond between the same atom pair");
            }
        }
    }
}

int MolGraph::find_bond(int a, int b) const
{
    for (const auto& nb : neighbors(a)) {
        if (nb.atom == b) {
            return nb.bond;
        }
    }
    return -1;
}

int MolGraph::heavy_atom_count() const
{
    return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.element != 1; }));
}

int MolGraph::total_hydrogens() const
{
    int h = 0;
    for (const auto& a : atoms_) {
        h += a.implicit_h + (a.element == 1 ? 1 : 0);
    }
    return h;
}

std::vector<int> MolGraph::components() const
{
    std::vector<int> comp(atoms_.size(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int s = 0; s < atom_count(); ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) {
            continue;
        }
        comp[static_cast<std::size_t>(s)] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const auto& nb : neighbors(u)) {
                if (comp[static_cast<std::size_t>(nb.atom)] < 0) {
                    comp[static_cast<std::size_t>(nb.atom)] = next;
                    stack.push_back(nb.atom);
                }
            }
        }
        ++next;
    }
    return comp;
}

int MolGraph::component_count() const
{
    const auto comp = components();
    return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

MolGraph MolGraph::permuted(std::span<const int> perm) const
{
    if (perm.size() != atoms_.size()) {
        throw DimensionMismatch("permutation size does not match atom count");
    }
    std::vector<int> inverse(perm.size(), -1);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const int old = perm[i];
        if (old < 0 || old >= atom_count() || inverse[static_cast<std::size_t>(old)] >= 0) {
            throw PreconditionError("not a permutation");
        }
        inverse[static_cast<std::size_t>(old)] = static_cast<int>(i);
    }
    std::vector<Atom> atoms(atoms_.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        atoms[i] = atoms_[static_cast<std::size_t>(perm[i])];
    }
    std::vector<Bond> bonds = bonds_;
    for (auto& b : bonds) {
        b.begin = inverse[static_cast<std::size_t>(b.begin)];
        b.end = inverse[static_cast<std::size_t>(b.end)];
        if (b.begin > b.end) {
            std::swap(b.begin, b.end);
        }
    }
    std::sort(bonds.begin(), bonds.end(),
              [](const Bond& x, const Bond& y) { return std::pair(x.begin, x.end) < std::pair(y.begin, y.end); });
    return MolGraph(std::move(atoms), std::move(bonds));
}

int explicit_valence(const MolGraph& g, int atom)
{
    int v = 0;
    for (const auto& nb : g.neighbors(atom)) {
        const int order = g.bond(nb.bond).order;
        v += order == kAromaticOrder ? 1 : order;
    }
    return v;
}

} // namespace staug::chem
