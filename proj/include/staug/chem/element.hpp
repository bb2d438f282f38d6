#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace staug::chem {

namespace elem {
inline constexpr int H = 1;
inline constexpr int B = 5;
inline constexpr int C = 6;
inline constexpr int N = 7;
inline constexpr int O = 8;
inline constexpr int F = 9;
inline constexpr int Si = 14;
inline constexpr int P = 15;
inline constexpr int S = 16;
inline constexpr int Cl = 17;
inline constexpr int Se = 34;
inline constexpr int As = 33;
inline constexpr int Br = 35;
inline constexpr int Te = 52;
inline constexpr int I = 53;
} // namespace elem

inline constexpr int kMaxElement = 94;

// Symbol for an atomic number in [1, kMaxElement].
std::string_view element_symbol(int z);

// Atomic number for a symbol with canonical capitalisation ("Cl"), or nullopt.
std::optional<int> element_from_symbol(std::string_view symbol);

// Standard atomic weight (IUPAC abridged).
double average_mass(int z);

// The supported organic set {H,B,C,N,O,F,Si,P,S,Cl,Br,I}; anything else is
// classed "metal/other".
bool is_organic(int z);

bool is_halogen(int z);

// Allowed neutral valences of the SMILES organic subset, ascending. Empty
// for elements outside the subset.
std::span<const int> default_valences(int z);

// Valences of a charged atom via the isoelectronic neighbour (N+ ~ C,
// O- ~ F, C- ~ N). Empty when the shifted element has no default valence.
std::span<const int> charged_valences(int z, int charge);

} // namespace staug::chem
