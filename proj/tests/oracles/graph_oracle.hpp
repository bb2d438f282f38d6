#pragma once

// Reference graph invariants computed the slow way, for cross-checking the
// descriptor engine.

#include "staug/chem/mol_graph.hpp"
#include "staug/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace staug::test {

inline chem::MolGraph carbon_graph(int n, const std::vector<std::pair<int, int>>& edges)
{
    std::vector<chem::Atom> atoms(static_cast<std::size_t>(n));
    std::vector<chem::Bond> bonds;
    for (auto [a, b] : edges) {
        bonds.push_back({a, b, 1, false});
    }
    return chem::MolGraph(atoms, bonds);
}

// Random spanning tree plus up to `extra` additional edges.
inline chem::MolGraph random_connected(Rng& rng, int n, int extra)
{
    std::vector<std::pair<int, int>> edges;
    auto has = [&](int a, int b) {
        return std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
            return (e.first == a && e.second == b) || (e.first == b && e.second == a);
        });
    };
    for (int i = 1; i < n; ++i) {
        edges.emplace_back(static_cast<int>(rng.index(static_cast<std::uint64_t>(i))), i);
    }
    for (int k = 0; k < extra; ++k) {
        const int a = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
        const int b = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
        if (a != b && !has(a, b)) {
            edges.emplace_back(a, b);
        }
    }
    return carbon_graph(n, edges);
}

inline std::vector<std::vector<double>> floyd_warshall(const chem::MolGraph& g)
{
    const auto n = static_cast<std::size_t>(g.atom_count());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
    }
    for (const auto& b : g.bonds()) {
        d[static_cast<std::size_t>(b.begin)][static_cast<std::size_t>(b.end)] = 1;
        d[static_cast<std::size_t>(b.end)][static_cast<std::size_t>(b.begin)] = 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
            }
        }
    }
    return d;
}

struct GraphReference {
    double wiener = 0;
    double zagreb1 = 0;
    double zagreb2 = 0;
    double balaban = 0;
    double eccentric = 0;
};

// Brute-force values from the all-pairs distance matrix and vertex degrees.
inline GraphReference graph_reference(const chem::MolGraph& g)
{
    const auto d = floyd_warshall(g);
    const auto n = d.size();
    GraphReference r;
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double ecc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j > i) {
                r.wiener += d[i][j];
            }
            s[i] += d[i][j];
            ecc = std::max(ecc, d[i][j]);
        }
        const double deg = g.degree(static_cast<int>(i));
        r.eccentric += ecc * deg;
        r.zagreb1 += deg * deg;
    }
    const double m = g.bond_count();
    double jsum = 0;
    for (const auto& b : g.bonds()) {
        const auto u = static_cast<std::size_t>(b.begin);
        const auto v = static_cast<std::size_t>(b.end);
        jsum += 1.0 / std::sqrt(s[u] * s[v]);
        r.zagreb2 += static_cast<double>(g.degree(b.begin)) * g.degree(b.end);
    }
    r.balaban = m / (m - static_cast<double>(n) + 2) * jsum;
    return r;
}

inline double rel_error(double actual, double expected)
{
    return std::fabs(actual - expected) / std::max(1.0, std::fabs(expected));
}

} // namespace staug::test
