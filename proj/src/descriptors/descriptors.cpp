#include "staug/descriptors/descriptors.hpp"

#include "staug/chem/element.hpp"
#include "staug/chem/rings.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>

namespace staug::desc {

using chem::MolGraph;
namespace elem = chem::elem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, 66> kSchema{
    // AtomCount
    "nAtom", "nHeavyAtom", "nH", "nC", "nN", "nO", "nS", "nP", "nF", "nCl", "nBr", "nI", "nX", "nHetero",
    "nAromAtom",
    // BondCount
    "nBonds", "nBondsS", "nBondsD", "nBondsT", "nBondsA", "nRot",
    // RingCount
    "nRing", "nAromRing", "nHRing", "n5Ring", "n6Ring",
    // Weight
    "MW", "AMW",
    // WienerIndex
    "WPath", "WPol",
    // ZagrebIndex
    "Zagreb1", "Zagreb2",
    // BalabanJ, EccentricConnectivityIndex, DistanceMatrix
    "BalabanJ", "ECIndex", "Diameter", "Radius",
    // Chi
    "Xp-0d", "Xp-1d", "Xp-2d", "Xp-3d", "Xp-0dv", "Xp-1dv", "Xp-2dv", "Xp-3dv",
    // KappaShapeIndex
    "Kier1", "Kier2", "Kier3",
    // HydrogenBond
    "nHBDon", "nHBAcc",
    // TopoPSA, McGowanVolume
    "TopoPSA", "VMcGowan",
    // Autocorrelation (Moreau-Broto), mass and degree weights
    "ATS1m", "ATS2m", "ATS3m", "ATS4m", "ATS1d", "ATS2d", "ATS3d", "ATS4d",
    // InformationContent
    "IC0", "IC1", "IC2", "TIC0", "TIC1", "TIC2",
    // Flexibility
    "FlexibilityIndex"};

// Order-independent floating sum: sort, then accumulate.
double sorted_sum(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

bool is_heavy(const MolGraph& g, int i) { return g.atom(i).element != elem::H; }

int heavy_degree(const MolGraph& g, int i)
{
    int d = 0;
    for (const auto& nb : g.neighbors(i)) {
        d += is_heavy(g, nb.atom) ? 1 : 0;
    }
    return d;
}

int hydrogens(const MolGraph& g, int i)
{
    int h = g.atom(i).implicit_h;
    for (const auto& nb : g.neighbors(i)) {
        h += is_heavy(g, nb.atom) ? 0 : 1;
    }
    return h;
}

std::vector<int> heavy_atoms(const MolGraph& g)
{
    std::vector<int> out;
    for (int i = 0; i < g.atom_count(); ++i) {
        if (is_heavy(g, i)) {
            out.push_back(i);
        }
    }
    return out;
}

int heavy_bond_count(const MolGraph& g)
{
    int m = 0;
    for (const auto& b : g.bonds()) {
        m += (is_heavy(g, b.begin) && is_heavy(g, b.end)) ? 1 : 0;
    }
    return m;
}

// Visits every simple path with `length` heavy bonds, once per direction.
void for_each_path(const MolGraph& g, int length, const std::function<void(const std::vector<int>&)>& fn)
{
    std::vector<int> path;
    std::vector<bool> on_path(static_cast<std::size_t>(g.atom_count()), false);
    std::function<void(int)> extend = [&](int u) {
        if (static_cast<int>(path.size()) == length + 1) {
            fn(path);
            return;
        }
        for (const auto& nb : g.neighbors(u)) {
            if (!is_heavy(g, nb.atom) || on_path[static_cast<std::size_t>(nb.atom)]) {
                continue;
            }
            on_path[static_cast<std::size_t>(nb.atom)] = true;
            path.push_back(nb.atom);
            extend(nb.atom);
            path.pop_back();
            on_path[static_cast<std::size_t>(nb.atom)] = false;
        }
    };
    for (int s : heavy_atoms(g)) {
        on_path[static_cast<std::size_t>(s)] = true;
        path.assign(1, s);
        extend(s);
        on_path[static_cast<std::size_t>(s)] = false;
    }
}

double valence_electrons(int z)
{
    switch (z) {
    case elem::B: return 3;
    case elem::C:
    case elem::Si: return 4;
    case elem::N:
    case elem::P: return 5;
    case elem::O:
    case elem::S: return 6;
    case elem::F:
    case elem::Cl:
    case elem::Br:
    case elem::I: return 7;
    default: return kNaN;
    }
}

// Kier-Hall valence delta; NaN when undefined.
double valence_delta(const MolGraph& g, int i)
{
    const auto& a = g.atom(i);
    const double zv = valence_electrons(a.element) - a.formal_charge;
    const double dv = (zv - hydrogens(g, i)) / (a.element - valence_electrons(a.element) - 1.0);
    return dv > 0.0 ? dv : kNaN;
}

double chi_sum(const MolGraph& g, int order, const std::function<double(int)>& delta)
{
    std::vector<double> terms;
    bool undefined = false;
    auto term = [&](const std::vector<int>& atoms) {
        std::vector<double> ds;
        for (int a : atoms) {
            ds.push_back(delta(a));
        }
        std::sort(ds.begin(), ds.end());
        double prod = 1.0;
        for (double d : ds) {
            prod *= d;
        }
        if (std::isnan(prod)) {
            undefined = true;
        } else if (prod > 0.0) {
            terms.push_back(1.0 / std::sqrt(prod));
        }
    };
    if (order == 0) {
        for (int a : heavy_atoms(g)) {
            term({a});
        }
    } else {
        // each path is seen from both ends; keep the one starting at the lower index
        for_each_path(g, order, [&](const std::vector<int>& p) {
            if (p.front() < p.back()) {
                term(p);
            }
        });
    }
    return undefined ? kNaN : sorted_sum(std::move(terms));
}

double mcgowan_contribution(int z)
{
    switch (z) {
    case elem::H: return 8.71;
    case elem::B: return 18.32;
    case elem::C: return 16.35;
    case elem::N: return 14.39;
    case elem::O: return 12.43;
    case elem::F: return 10.48;
    case elem::Si: return 26.83;
    case elem::P: return 24.87;
    case elem::S: return 22.91;
    case elem::Cl: return 20.95;
    case elem::Br: return 26.21;
    case elem::I: return 34.53;
    default: return kNaN;
    }
}

struct BondTally {
    int single = 0;
    int dbl = 0;
    int triple = 0;
    int aromatic = 0;
};

BondTally tally(const MolGraph& g, int i)
{
    BondTally t;
    for (const auto& nb : g.neighbors(i)) {
        if (!is_heavy(g, nb.atom)) {
            continue;
        }
        const auto& b = g.bond(nb.bond);
        if (b.aromatic) {
            ++t.aromatic;
        } else if (b.order == 1) {
            ++t.single;
        } else if (b.order == 2) {
            ++t.dbl;
        } else {
            ++t.triple;
        }
    }
    return t;
}

// Polar surface contributions for N and O environments (Ertl et al. 2000).
// Environments missing from the table contribute nothing.
double psa_contribution(const MolGraph& g, const chem::RingInfo& rings, int i)
{
    const auto& a = g.atom(i);
    const int h = hydrogens(g, i);
    const BondTally t = tally(g, i);
    const int q = a.formal_charge;
    auto in_three_ring = [&] {
        for (const auto& r : rings.rings) {
            if (r.size() == 3 && std::find(r.atoms.begin(), r.atoms.end(), i) != r.atoms.end()) {
                return true;
            }
        }
        return false;
    };
    auto is = [&](int s, int d, int tr, int ar) {
        return t.single == s && t.dbl == d && t.triple == tr && t.aromatic == ar;
    };
    if (a.element == elem::N) {
        if (q == 0 && !a.aromatic) {
            if (h == 0) {
                if (is(3, 0, 0, 0)) return in_three_ring() ? 3.01 : 3.24;
                if (is(1, 1, 0, 0)) return 12.36;
                if (is(0, 0, 1, 0)) return 23.79;
                if (is(1, 2, 0, 0)) return 11.68;
                if (is(0, 1, 1, 0) || is(0, 2, 0, 0)) return 13.60;
            } else if (h == 1) {
                if (is(2, 0, 0, 0)) return in_three_ring() ? 21.94 : 12.03;
                if (is(0, 1, 0, 0)) return 23.85;
            } else if (h == 2) {
                if (is(1, 0, 0, 0)) return 26.02;
            }
        } else if (q == 1 && !a.aromatic) {
            if (h == 0) {
                if (is(4, 0, 0, 0)) return 0.00;
                if (is(2, 1, 0, 0)) return 3.01;
                if (is(1, 0, 1, 0)) return 4.36;
                if (is(0, 2, 0, 0)) return 13.60;
            } else if (h == 1) {
                if (is(3, 0, 0, 0)) return 4.44;
                if (is(1, 1, 0, 0)) return 13.97;
            } else if (h == 2) {
                if (is(2, 0, 0, 0)) return 16.61;
                if (is(0, 1, 0, 0)) return 25.59;
            } else if (h == 3) {
                if (is(1, 0, 0, 0)) return 27.64;
            }
        } else if (q == 0 && a.aromatic) {
            if (h == 0) {
                if (is(0, 0, 0, 2)) return 12.89;
                if (is(0, 0, 0, 3)) return 4.41;
                if (is(1, 0, 0, 2)) return 4.93;
                if (is(0, 1, 0, 2)) return 8.39;
            } else if (h == 1 && is(0, 0, 0, 2)) {
                return 15.79;
            }
        } else if (q == 1 && a.aromatic) {
            if (h == 0) {
                if (is(0, 0, 0, 3)) return 4.10;
                if (is(1, 0, 0, 2)) return 3.88;
            } else if (h == 1 && is(0, 0, 0, 2)) {
                return 14.14;
            }
        }
        return 0.0;
    }
    if (a.element == elem::O) {
        if (a.aromatic) {
            return (q == 0 && is(0, 0, 0, 2)) ? 13.14 : 0.0;
        }
        if (q == 0) {
            if (h == 0 && is(2, 0, 0, 0)) return in_three_ring() ? 12.53 : 9.23;
            if (h == 0 && is(0, 1, 0, 0)) return 17.07;
            if (h == 1 && is(1, 0, 0, 0)) return 20.23;
        } else if (q == -1) {
            if (h == 0 && is(1, 0, 0, 0)) return 23.06;
        }
        return 0.0;
    }
    return 0.0;
}

// Shannon entropy (bits) of atom classes in the hydrogen-filled graph, where
// the class at radius r is refined from radius r-1 by the multiset of
// (bond code, neighbour class).
std::array<double, 3> information_content(const MolGraph& g, std::array<double, 3>& total)
{
    // expand implicit hydrogens into vertices
    std::vector<int> element;
    std::vector<std::vector<std::pair<int, int>>> adj; // (neighbour, bond code)
    for (int i = 0; i < g.atom_count(); ++i) {
        element.push_back(g.atom(i).element);
    }
    adj.resize(element.size());
    for (const auto& b : g.bonds()) {
        const int code = b.aromatic ? 4 : b.order;
        adj[static_cast<std::size_t>(b.begin)].emplace_back(b.end, code);
        adj[static_cast<std::size_t>(b.end)].emplace_back(b.begin, code);
    }
    for (int i = 0; i < g.atom_count(); ++i) {
        for (int k = 0; k < g.atom(i).implicit_h; ++k) {
            const int h = static_cast<int>(element.size());
            element.push_back(elem::H);
            adj.emplace_back();
            adj.back().emplace_back(i, 1);
            adj[static_cast<std::size_t>(i)].emplace_back(h, 1);
        }
    }
    const std::size_t n = element.size();
    std::vector<int> cls(element.begin(), element.end());
    std::array<double, 3> ic{};
    for (int r = 0; r < 3; ++r) {
        if (r > 0) {
            using Key = std::pair<int, std::vector<std::pair<int, int>>>;
            std::vector<Key> keys(n);
            for (std::size_t v = 0; v < n; ++v) {
                keys[v].first = cls[v];
                for (const auto& [u, code] : adj[v]) {
                    keys[v].second.emplace_back(code, cls[static_cast<std::size_t>(u)]);
                }
                std::sort(keys[v].second.begin(), keys[v].second.end());
            }
            std::map<Key, int> ids;
            for (const auto& k : keys) {
                ids.emplace(k, 0);
            }
            int next = 0;
            for (auto& [k, id] : ids) {
                id = next++;
            }
            for (std::size_t v = 0; v < n; ++v) {
                cls[v] = ids[keys[v]];
            }
        }
        std::map<int, int> counts;
        for (int c : cls) {
            ++counts[c];
        }
        std::vector<double> terms;
        for (const auto& [c, k] : counts) {
            const double p = static_cast<double>(k) / static_cast<double>(n);
            terms.push_back(-p * std::log2(p));
        }
        ic[static_cast<std::size_t>(r)] = sorted_sum(std::move(terms));
        total[static_cast<std::size_t>(r)] = ic[static_cast<std::size_t>(r)] * static_cast<double>(n);
    }
    return ic;
}

} // namespace

std::span<const std::string_view> schema() { return kSchema; }
std::size_t schema_size() { return kSchema.size(); }

int schema_index(std::string_view name)
{
    for (std::size_t i = 0; i < kSchema.size(); ++i) {
        if (kSchema[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

namespace topo {

std::vector<std::vector<int>> distance_matrix(const MolGraph& g)
{
    const int n = g.atom_count();
    std::vector<std::vector<int>> d(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
    for (int s = 0; s < n; ++s) {
        if (!is_heavy(g, s)) {
            continue;
        }
        auto& row = d[static_cast<std::size_t>(s)];
        std::queue<int> q;
        row[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (const auto& nb : g.neighbors(u)) {
                if (is_heavy(g, nb.atom) && row[static_cast<std::size_t>(nb.atom)] < 0) {
                    row[static_cast<std::size_t>(nb.atom)] = row[static_cast<std::size_t>(u)] + 1;
                    q.push(nb.atom);
                }
            }
        }
    }
    return d;
}

double wiener_index(const MolGraph& g)
{
    const auto d = distance_matrix(g);
    long w = 0;
    for (int i = 0; i < g.atom_count(); ++i) {
        for (int j = i + 1; j < g.atom_count(); ++j) {
            const int x = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            w += x > 0 ? x : 0;
        }
    }
    return static_cast<double>(w);
}

double zagreb_m1(const MolGraph& g)
{
    long s = 0;
    for (int i : heavy_atoms(g)) {
        const long d = heavy_degree(g, i);
        s += d * d;
    }
    return static_cast<double>(s);
}

double zagreb_m2(const MolGraph& g)
{
    long s = 0;
    for (const auto& b : g.bonds()) {
        if (is_heavy(g, b.begin) && is_heavy(g, b.end)) {
            s += static_cast<long>(heavy_degree(g, b.begin)) * heavy_degree(g, b.end);
        }
    }
    return static_cast<double>(s);
}

double balaban_j(const MolGraph& g)
{
    const auto heavy = heavy_atoms(g);
    const int m = heavy_bond_count(g);
    if (m == 0) {
        return kNaN;
    }
    const auto d = distance_matrix(g);
    std::vector<long> dist_sum(static_cast<std::size_t>(g.atom_count()), 0);
    for (int i : heavy) {
        for (int j : heavy) {
            const int x = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (x < 0) {
                return kNaN; // disconnected
            }
            dist_sum[static_cast<std::size_t>(i)] += x;
        }
    }
    const int n = static_cast<int>(heavy.size());
    const int mu = m - n + 1;
    std::vector<double> terms;
    for (const auto& b : g.bonds()) {
        if (is_heavy(g, b.begin) && is_heavy(g, b.end)) {
            terms.push_back(1.0 / std::sqrt(static_cast<double>(dist_sum[static_cast<std::size_t>(b.begin)])
                                            * static_cast<double>(dist_sum[static_cast<std::size_t>(b.end)])));
        }
    }
    return static_cast<double>(m) / (mu + 1.0) * sorted_sum(std::move(terms));
}

double eccentric_connectivity(const MolGraph& g)
{
    const auto d = distance_matrix(g);
    long s = 0;
    for (int i : heavy_atoms(g)) {
        const auto& row = d[static_cast<std::size_t>(i)];
        const int ecc = *std::max_element(row.begin(), row.end());
        s += static_cast<long>(ecc) * heavy_degree(g, i);
    }
    return static_cast<double>(s);
}

long path_count(const MolGraph& g, int length)
{
    if (length == 0) {
        return static_cast<long>(heavy_atoms(g).size());
    }
    long count = 0;
    for_each_path(g, length, [&](const std::vector<int>&) { ++count; });
    return count / 2;
}

double chi_path(const MolGraph& g, int order)
{
    return chi_sum(g, order, [&](int a) { return static_cast<double>(heavy_degree(g, a)); });
}

double kappa(const MolGraph& g, int order)
{
    const double a = static_cast<double>(heavy_atoms(g).size());
    const double p = static_cast<double>(path_count(g, order));
    if (p <= 0.0) {
        return kNaN;
    }
    switch (order) {
    case 1:
        return a < 2 ? kNaN : a * (a - 1) * (a - 1) / (p * p);
    case 2:
        return a < 3 ? kNaN : (a - 1) * (a - 2) * (a - 2) / (p * p);
    case 3:
        if (a < 4) {
            return kNaN;
        }
        return (static_cast<long>(a) % 2 == 1) ? (a - 1) * (a - 3) * (a - 3) / (p * p)
                                               : (a - 3) * (a - 2) * (a - 2) / (p * p);
    default:
        return kNaN;
    }
}

double mcgowan_volume(const MolGraph& g)
{
    std::vector<double> terms;
    int bonds = g.bond_count();
    for (int i = 0; i < g.atom_count(); ++i) {
        const double c = mcgowan_contribution(g.atom(i).element);
        if (std::isnan(c)) {
            return kNaN;
        }
        terms.push_back(c);
        for (int k = 0; k < g.atom(i).implicit_h; ++k) {
            terms.push_back(mcgowan_contribution(elem::H));
        }
        bonds += g.atom(i).implicit_h;
    }
    return (sorted_sum(std::move(terms)) - 6.56 * bonds) / 100.0;
}

double topological_psa(const MolGraph& g)
{
    const auto rings = chem::find_rings(g);
    std::vector<double> terms;
    for (int i = 0; i < g.atom_count(); ++i) {
        terms.push_back(psa_contribution(g, rings, i));
    }
    return sorted_sum(std::move(terms));
}

int rotatable_bonds(const MolGraph& g)
{
    const auto ring = chem::ring_bonds(g);
    auto has_triple = [&](int a) {
        for (const auto& nb : g.neighbors(a)) {
            if (g.bond(nb.bond).order == 3) {
                return true;
            }
        }
        return false;
    };
    int n = 0;
    for (int b = 0; b < g.bond_count(); ++b) {
        const auto& bond = g.bond(b);
        if (bond.aromatic || bond.order != 1 || ring[static_cast<std::size_t>(b)]) {
            continue;
        }
        if (!is_heavy(g, bond.begin) || !is_heavy(g, bond.end)) {
            continue;
        }
        if (heavy_degree(g, bond.begin) < 2 || heavy_degree(g, bond.end) < 2) {
            continue;
        }
        if (has_triple(bond.begin) || has_triple(bond.end)) {
            continue;
        }
        ++n;
    }
    return n;
}

} // namespace topo

DescriptorVector compute_descriptors(const MolGraph& g)
{
    DescriptorVector out;
    out.values.assign(kSchema.size(), kNaN);
    auto set = [&](std::string_view name, double v) {
        out.values[static_cast<std::size_t>(schema_index(name))] = v;
    };

    const auto heavy = heavy_atoms(g);
    const auto rings = chem::find_rings(g);
    const double n_heavy = static_cast<double>(heavy.size());

    // AtomCount
    int n_h = 0;
    std::map<int, int> by_element;
    int n_arom = 0;
    for (int i = 0; i < g.atom_count(); ++i) {
        n_h += g.atom(i).implicit_h;
        ++by_element[g.atom(i).element];
        n_arom += g.atom(i).aromatic ? 1 : 0;
    }
    n_h += by_element[elem::H];
    auto count = [&](int z) { return static_cast<double>(by_element.count(z) ? by_element.at(z) : 0); };
    const double n_x = count(elem::F) + count(elem::Cl) + count(elem::Br) + count(elem::I);
    set("nAtom", n_heavy + n_h);
    set("nHeavyAtom", n_heavy);
    set("nH", n_h);
    set("nC", count(elem::C));
    set("nN", count(elem::N));
    set("nO", count(elem::O));
    set("nS", count(elem::S));
    set("nP", count(elem::P));
    set("nF", count(elem::F));
    set("nCl", count(elem::Cl));
    set("nBr", count(elem::Br));
    set("nI", count(elem::I));
    set("nX", n_x);
    set("nHetero", n_heavy - count(elem::C));
    set("nAromAtom", n_arom);

    // BondCount
    int nb_s = 0, nb_d = 0, nb_t = 0, nb_a = 0;
    for (const auto& b : g.bonds()) {
        if (!is_heavy(g, b.begin) || !is_heavy(g, b.end)) {
            continue;
        }
        if (b.aromatic) {
            ++nb_a;
        } else if (b.order == 1) {
            ++nb_s;
        } else if (b.order == 2) {
            ++nb_d;
        } else {
            ++nb_t;
        }
    }
    const int n_rot = topo::rotatable_bonds(g);
    set("nBonds", nb_s + nb_d + nb_t + nb_a);
    set("nBondsS", nb_s);
    set("nBondsD", nb_d);
    set("nBondsT", nb_t);
    set("nBondsA", nb_a);
    set("nRot", n_rot);

    // RingCount
    int n_arom_ring = 0, n_hetero_ring = 0, n5 = 0, n6 = 0;
    for (const auto& r : rings.rings) {
        bool aromatic = true;
        bool hetero = false;
        for (int a : r.atoms) {
            aromatic = aromatic && g.atom(a).aromatic;
            hetero = hetero || g.atom(a).element != elem::C;
        }
        for (int b : r.bonds) {
            aromatic = aromatic && g.bond(b).aromatic;
        }
        n_arom_ring += aromatic;
        n_hetero_ring += hetero;
        n5 += r.size() == 5;
        n6 += r.size() == 6;
    }
    set("nRing", static_cast<double>(rings.rings.size()));
    set("nAromRing", n_arom_ring);
    set("nHRing", n_hetero_ring);
    set("n5Ring", n5);
    set("n6Ring", n6);

    // Weight
    std::vector<double> masses;
    for (int i = 0; i < g.atom_count(); ++i) {
        masses.push_back(chem::average_mass(g.atom(i).element));
        for (int k = 0; k < g.atom(i).implicit_h; ++k) {
            masses.push_back(chem::average_mass(elem::H));
        }
    }
    const double mw = sorted_sum(masses);
    set("MW", mw);
    set("AMW", mw / static_cast<double>(masses.size()));

    // distance-based
    const auto dist = topo::distance_matrix(g);
    long wpol = 0;
    int diameter = 0;
    int radius = std::numeric_limits<int>::max();
    for (int i : heavy) {
        int ecc = 0;
        for (int j : heavy) {
            const int x = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            ecc = std::max(ecc, x);
            wpol += (j > i && x == 3) ? 1 : 0;
        }
        diameter = std::max(diameter, ecc);
        radius = std::min(radius, ecc);
    }
    set("WPath", topo::wiener_index(g));
    set("WPol", static_cast<double>(wpol));
    set("Zagreb1", topo::zagreb_m1(g));
    set("Zagreb2", topo::zagreb_m2(g));
    set("BalabanJ", topo::balaban_j(g));
    set("ECIndex", topo::eccentric_connectivity(g));
    set("Diameter", heavy.empty() ? kNaN : diameter);
    set("Radius", heavy.empty() ? kNaN : radius);

    // Chi
    for (int k = 0; k <= 3; ++k) {
        set("Xp-" + std::to_string(k) + "d", topo::chi_path(g, k));
        set("Xp-" + std::to_string(k) + "dv", chi_sum(g, k, [&](int a) { return valence_delta(g, a); }));
    }

    // Kappa
    for (int k = 1; k <= 3; ++k) {
        set("Kier" + std::to_string(k), topo::kappa(g, k));
    }

    // HydrogenBond
    int donors = 0;
    int acceptors = 0;
    for (int i : heavy) {
        const auto& a = g.atom(i);
        if (a.element != elem::N && a.element != elem::O) {
            continue;
        }
        const int h = hydrogens(g, i);
        donors += h > 0 ? 1 : 0;
        if (a.element == elem::O && a.formal_charge <= 0) {
            ++acceptors;
        } else if (a.element == elem::N && a.formal_charge <= 0
                   && !(a.aromatic && heavy_degree(g, i) + h == 3)) {
            ++acceptors;
        }
    }
    set("nHBDon", donors);
    set("nHBAcc", acceptors);

    set("TopoPSA", topo::topological_psa(g));
    set("VMcGowan", topo::mcgowan_volume(g));

    // Autocorrelation
    for (int lag = 1; lag <= 4; ++lag) {
        std::vector<double> tm;
        std::vector<double> td;
        for (int i : heavy) {
            for (int j : heavy) {
                if (j > i && dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == lag) {
                    tm.push_back(chem::average_mass(g.atom(i).element) * chem::average_mass(g.atom(j).element));
                    td.push_back(static_cast<double>(heavy_degree(g, i) * heavy_degree(g, j)));
                }
            }
        }
        set("ATS" + std::to_string(lag) + "m", sorted_sum(std::move(tm)));
        set("ATS" + std::to_string(lag) + "d", sorted_sum(std::move(td)));
    }

    // InformationContent
    std::array<double, 3> tic{};
    const auto ic = information_content(g, tic);
    for (int r = 0; r < 3; ++r) {
        set("IC" + std::to_string(r), ic[static_cast<std::size_t>(r)]);
        set("TIC" + std::to_string(r), tic[static_cast<std::size_t>(r)]);
    }

    set("FlexibilityIndex", n_heavy > 0 ? n_rot / n_heavy : kNaN);
    return out;
}

} // namespace staug::desc
