#include "staug/chem/rings.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <set>

namespace staug::chem {

std::vector<bool> ring_bonds(const MolGraph& g)
{
    const int n = g.atom_count();
    std::vector<bool> is_ring(static_cast<std::size_t>(g.bond_count()), true);
    std::vector<int> disc(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    int timer = 0;

    std::function<void(int, int)> dfs = [&](int u, int parent_bond) {
        disc[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = timer++;
        for (const auto& nb : g.neighbors(u)) {
            if (nb.bond == parent_bond) {
                continue;
            }
            const auto v = static_cast<std::size_t>(nb.atom);
            if (disc[v] < 0) {
                dfs(nb.atom, nb.bond);
                low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], low[v]);
                if (low[v] > disc[static_cast<std::size_t>(u)]) {
                    is_ring[static_cast<std::size_t>(nb.bond)] = false;
                }
            } else {
                low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], disc[v]);
            }
        }
    };
    for (int s = 0; s < n; ++s) {
        if (disc[static_cast<std::size_t>(s)] < 0) {
            dfs(s, -1);
        }
    }
    return is_ring;
}

namespace {

using EdgeSet = std::vector<std::uint64_t>;

bool test_bit(const EdgeSet& s, int i) { return (s[static_cast<std::size_t>(i) / 64] >> (i % 64)) & 1U; }
void set_bit(EdgeSet& s, int i) { s[static_cast<std::size_t>(i) / 64] |= std::uint64_t{1} << (i % 64); }

int lowest_bit(const EdgeSet& s)
{
    for (std::size_t w = 0; w < s.size(); ++w) {
        if (s[w]) {
            return static_cast<int>(w * 64) + __builtin_ctzll(s[w]);
        }
    }
    return -1;
}

Ring ring_from_edges(const MolGraph& g, const EdgeSet& edges)
{
    Ring r;
    for (int b = 0; b < g.bond_count(); ++b) {
        if (test_bit(edges, b)) {
            r.bonds.push_back(b);
        }
    }
    // walk the cycle starting from the lowest atom
    int start = g.atom_count();
    for (int b : r.bonds) {
        start = std::min({start, g.bond(b).begin, g.bond(b).end});
    }
    int prev = -1;
    int cur = start;
    do {
        r.atoms.push_back(cur);
        int next = -1;
        for (const auto& nb : g.neighbors(cur)) {
            if (test_bit(edges, nb.bond) && nb.atom != prev) {
                next = nb.atom;
                break;
            }
        }
        prev = cur;
        cur = next;
    } while (cur != start && cur >= 0 && r.atoms.size() <= r.bonds.size());
    return r;
}

} // namespace

RingInfo find_rings(const MolGraph& g)
{
    RingInfo info;
    const int n = g.atom_count();
    const int m = g.bond_count();
    info.ring_bond = ring_bonds(g);
    info.ring_atom.assign(static_cast<std::size_t>(n), false);
    for (int b = 0; b < m; ++b) {
        if (info.ring_bond[static_cast<std::size_t>(b)]) {
            info.ring_atom[static_cast<std::size_t>(g.bond(b).begin)] = true;
            info.ring_atom[static_cast<std::size_t>(g.bond(b).end)] = true;
        }
    }
    info.cyclomatic = m - n + g.component_count();
    if (info.cyclomatic == 0) {
        return info;
    }

    const std::size_t words = (static_cast<std::size_t>(m) + 63) / 64;
    std::set<std::pair<int, EdgeSet>> candidates;

    // Horton candidates: for each root v and ring edge (x, y), the cycle
    // P(v,x) + (x,y) + P(y,v) when the two shortest paths meet only at v.
    for (int v = 0; v < n; ++v) {
        if (!info.ring_atom[static_cast<std::size_t>(v)]) {
            continue;
        }
        std::vector<int> dist(static_cast<std::size_t>(n), -1);
        std::vector<int> parent_bond(static_cast<std::size_t>(n), -1);
        std::queue<int> q;
        dist[static_cast<std::size_t>(v)] = 0;
        q.push(v);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (const auto& nb : g.neighbors(u)) {
                if (!info.ring_bond[static_cast<std::size_t>(nb.bond)]) {
                    continue;
                }
                if (dist[static_cast<std::size_t>(nb.atom)] < 0) {
                    dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(u)] + 1;
                    parent_bond[static_cast<std::size_t>(nb.atom)] = nb.bond;
                    q.push(nb.atom);
                }
            }
        }
        auto path = [&](int x, std::vector<int>& atoms, EdgeSet& edges) {
            while (x != v) {
                atoms.push_back(x);
                const int pb = parent_bond[static_cast<std::size_t>(x)];
                set_bit(edges, pb);
                x = g.bond(pb).other(x);
            }
        };
        for (int b = 0; b < m; ++b) {
            if (!info.ring_bond[static_cast<std::size_t>(b)]) {
                continue;
            }
            const int x = g.bond(b).begin;
            const int y = g.bond(b).end;
            if (dist[static_cast<std::size_t>(x)] < 0 || dist[static_cast<std::size_t>(y)] < 0) {
                continue;
            }
            if (parent_bond[static_cast<std::size_t>(x)] == b || parent_bond[static_cast<std::size_t>(y)] == b) {
                continue;
            }
            std::vector<int> ax;
            std::vector<int> ay;
            EdgeSet edges(words, 0);
            path(x, ax, edges);
            path(y, ay, edges);
            std::sort(ax.begin(), ax.end());
            std::sort(ay.begin(), ay.end());
            std::vector<int> common;
            std::set_intersection(ax.begin(), ax.end(), ay.begin(), ay.end(), std::back_inserter(common));
            if (!common.empty()) {
                continue;
            }
            set_bit(edges, b);
            const int len = dist[static_cast<std::size_t>(x)] + dist[static_cast<std::size_t>(y)] + 1;
            candidates.emplace(len, std::move(edges));
        }
    }

    // Greedy independent selection over GF(2): shortest first, then lexicographic.
    std::vector<EdgeSet> basis; // reduced rows, each with a distinct pivot
    std::vector<int> pivots;
    for (const auto& [len, edges] : candidates) {
        EdgeSet r = edges;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (test_bit(r, pivots[k])) {
                for (std::size_t w = 0; w < words; ++w) {
                    r[w] ^= basis[k][w];
                }
            }
        }
        const int p = lowest_bit(r);
        if (p < 0) {
            continue;
        }
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (test_bit(basis[k], p)) {
                for (std::size_t w = 0; w < words; ++w) {
                    basis[k][w] ^= r[w];
                }
            }
        }
        basis.push_back(r);
        pivots.push_back(p);
        info.rings.push_back(ring_from_edges(g, edges));
        if (static_cast<int>(info.rings.size()) == info.cyclomatic) {
            break;
        }
    }
    return info;
}

} // namespace staug::chem
