#pragma once

#include "staug/chem/mol_graph.hpp"

#include <string>
#include <string_view>

namespace staug::chem {

// Parses SMILES into a graph. Ring closures are resolved, explicit [H] atoms
// are folded into their neighbour's hydrogen count, implicit hydrogens are
// assigned, and lowercase atoms are marked aromatic as hints (their bonds
// carry kAromaticOrder until perceive_aromaticity assigns Kekule orders).
// Stereo markers are accepted and discarded.
//
// Throws SyntaxError, ValenceError, UnsupportedFeature.
MolGraph parse_smiles(std::string_view text);

// Canonical SMILES. Invariant under atom relabelling; stereo is not encoded.
// Expects a graph returned by perceive_aromaticity.
std::string canonical_smiles(const MolGraph& g);

// parse_smiles followed by perceive_aromaticity.
MolGraph read_smiles(std::string_view text);

// read_smiles followed by canonical_smiles.
std::string canonicalize(std::string_view text);

} // namespace staug::chem
