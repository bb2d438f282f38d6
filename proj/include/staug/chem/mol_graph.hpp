#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace staug::chem {

struct Atom {
    int element = 6;
    int formal_charge = 0;
    bool aromatic = false;
    // Attached hydrogens that are not graph nodes (implicit plus bracket H).
    int implicit_h = 0;
    bool ring_member = false;

    bool operator==(const Atom&) const = default;
};

// Bond order 1..3 is the Kekule order. kAromaticOrder marks an aromatic bond
// read from input whose Kekule order has not been assigned yet.
inline constexpr int kAromaticOrder = 0;

struct Bond {
    int begin = 0;
    int end = 0;
    int order = 1;
    bool aromatic = false;

    int other(int atom) const { return atom == begin ? end : begin; }
    bool operator==(const Bond&) const = default;
};

struct Neighbor {
    int atom;
    int bond;
};

// Immutable molecular graph. Construction validates bond endpoints and
// uniqueness and builds the adjacency lists as the symmetric closure of the
// bond list (each list sorted by neighbour index).
class MolGraph {
public:
    MolGraph() = default;
    MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

    std::span<const Atom> atoms() const { return atoms_; }
    std::span<const Bond> bonds() const { return bonds_; }
    const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
    const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
    std::span<const Neighbor> neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }

    int atom_count() const { return static_cast<int>(atoms_.size()); }
    int bond_count() const { return static_cast<int>(bonds_.size()); }
    int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

    // Bond index between a and b, or -1.
    int find_bond(int a, int b) const;

    int heavy_atom_count() const;
    int total_hydrogens() const;

    // Connected-component id per atom, components numbered by lowest atom index.
    std::vector<int> components() const;
    int component_count() const;

    // Relabels atoms: atom i of the result is atom perm[i] of this graph.
    // Bond list order follows the new labels.
    MolGraph permuted(std::span<const int> perm) const;

    bool operator==(const MolGraph& o) const { return atoms_ == o.atoms_ && bonds_ == o.bonds_; }

private:
    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

// Sum of bond orders at an atom, aromatic-unassigned bonds counted as 1.
int explicit_valence(const MolGraph& g, int atom);

} // namespace staug::chem
