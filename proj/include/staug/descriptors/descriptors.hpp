#pragma once

#include "staug/chem/mol_graph.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace staug::desc {

inline constexpr std::string_view kSchemaId = "staug-2d-v1";

// Ordered descriptor names of the pinned schema.
std::span<const std::string_view> schema();
std::size_t schema_size();
// Column of a descriptor name, or -1.
int schema_index(std::string_view name);

struct DescriptorVector {
    std::vector<double> values; // NaN marks a missing value
    std::string schema_id{kSchemaId};
};

// Computes the whole schema for one molecule (aromaticity perceived).
// Values undefined for the molecule come back as NaN.
DescriptorVector compute_descriptors(const chem::MolGraph& g);

// Building blocks, exposed for tests. All operate on the heavy-atom graph.
namespace topo {

// All-pairs shortest path lengths by BFS; -1 for disconnected pairs.
std::vector<std::vector<int>> distance_matrix(const chem::MolGraph& g);

double wiener_index(const chem::MolGraph& g);
double zagreb_m1(const chem::MolGraph& g);
double zagreb_m2(const chem::MolGraph& g);
// NaN for disconnected graphs or graphs without bonds.
double balaban_j(const chem::MolGraph& g);
double eccentric_connectivity(const chem::MolGraph& g);

// Number of simple paths with `length` bonds (each path counted once).
long path_count(const chem::MolGraph& g, int length);
// Simple path connectivity index of the given order (heavy degree weights).
double chi_path(const chem::MolGraph& g, int order);
// Kier shape index kappa_1..3; NaN when undefined.
double kappa(const chem::MolGraph& g, int order);

double mcgowan_volume(const chem::MolGraph& g);
double topological_psa(const chem::MolGraph& g);
int rotatable_bonds(const chem::MolGraph& g);

} // namespace topo

} // namespace staug::desc
