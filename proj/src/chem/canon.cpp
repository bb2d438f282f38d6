#include "staug/chem/element.hpp"
#include "staug/chem/smiles.hpp"

#include "staug/common/error.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <string>
#include <tuple>

namespace staug::chem {

namespace {

int bond_code(const Bond& b) { return b.aromatic ? 4 : b.order; }

using Ranks = std::vector<int>;

// rank[i] = number of atoms whose key sorts strictly before atom i's key.
template <typename Key>
Ranks rank_by(const std::vector<Key>& keys)
{
    const std::size_t n = keys.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)]; });
    Ranks r(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(idx[k]);
        if (k > 0 && !(keys[static_cast<std::size_t>(idx[k - 1])] < keys[i])) {
            r[i] = r[static_cast<std::size_t>(idx[k - 1])];
        } else {
            r[i] = static_cast<int>(k);
        }
    }
    return r;
}

int class_count(const Ranks& r)
{
    Ranks s = r;
    std::sort(s.begin(), s.end());
    return static_cast<int>(std::unique(s.begin(), s.end()) - s.begin());
}

Ranks initial_ranks(const MolGraph& g)
{
    using Key = std::array<int, 6>;
    std::vector<Key> keys;
    keys.reserve(static_cast<std::size_t>(g.atom_count()));
    for (int i = 0; i < g.atom_count(); ++i) {
        const Atom& a = g.atom(i);
        keys.push_back({a.element, g.degree(i), a.formal_charge, a.implicit_h, a.aromatic ? 1 : 0, a.ring_member ? 1 : 0});
    }
    return rank_by(keys);
}

// Iterative Morgan-style refinement. The current rank is the primary key so
// the order of existing classes is preserved.
Ranks refine(const MolGraph& g, Ranks ranks)
{
    int classes = class_count(ranks);
    using Key = std::pair<int, std::vector<std::pair<int, int>>>;
    for (;;) {
        std::vector<Key> keys(ranks.size());
        for (int i = 0; i < g.atom_count(); ++i) {
            auto& k = keys[static_cast<std::size_t>(i)];
            k.first = ranks[static_cast<std::size_t>(i)];
            for (const auto& nb : g.neighbors(i)) {
                k.second.emplace_back(ranks[static_cast<std::size_t>(nb.atom)], bond_code(g.bond(nb.bond)));
            }
            std::sort(k.second.begin(), k.second.end());
        }
        Ranks next = rank_by(keys);
        const int c = class_count(next);
        ranks = std::move(next);
        if (c == classes) {
            return ranks;
        }
        classes = c;
    }
}

std::string atom_token(const MolGraph& g, int i)
{
    const Atom& a = g.atom(i);
    int used = 0;
    for (const auto& nb : g.neighbors(i)) {
        const Bond& b = g.bond(nb.bond);
        used += b.aromatic ? 1 : b.order;
    }
    const bool shorthand_element = a.element == elem::B || a.element == elem::C || a.element == elem::N
                                   || a.element == elem::O || a.element == elem::P || a.element == elem::S
                                   || (!a.aromatic && (a.element == elem::F || a.element == elem::Cl
                                                       || a.element == elem::Br || a.element == elem::I));
    std::string symbol(element_symbol(a.element));
    if (a.aromatic) {
        for (auto& ch : symbol) {
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    if (shorthand_element && a.formal_charge == 0) {
        const auto valences = default_valences(a.element);
        int implied = -1;
        if (a.aromatic && used + 1 <= valences.front()) {
            implied = valences.front() - used - 1;
        } else {
            auto it = std::find_if(valences.begin(), valences.end(), [&](int v) { return v >= used; });
            if (it != valences.end()) {
                implied = *it - used;
            }
        }
        if (implied == a.implicit_h) {
            return symbol;
        }
    }
    std::string out = "[" + symbol;
    if (a.implicit_h == 1) {
        out += "H";
    } else if (a.implicit_h > 1) {
        out += "H" + std::to_string(a.implicit_h);
    }
    if (a.formal_charge != 0) {
        out += a.formal_charge > 0 ? "+" : "-";
        if (std::abs(a.formal_charge) > 1) {
            out += std::to_string(std::abs(a.formal_charge));
        }
    }
    out += "]";
    return out;
}

std::string bond_token(const MolGraph& g, int bond)
{
    const Bond& b = g.bond(bond);
    if (b.aromatic) {
        return {};
    }
    switch (b.order) {
    case 2:
        return "=";
    case 3:
        return "#";
    default:
        return (g.atom(b.begin).aromatic && g.atom(b.end).aromatic) ? "-" : "";
    }
}

std::string ring_label(int digit) { return digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit); }

std::string emit(const MolGraph& g, const Ranks& ranks)
{
    const int n = g.atom_count();
    std::vector<std::vector<Neighbor>> sorted(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& list = sorted[static_cast<std::size_t>(i)];
        list.assign(g.neighbors(i).begin(), g.neighbors(i).end());
        std::sort(list.begin(), list.end(), [&](const Neighbor& x, const Neighbor& y) {
            return ranks[static_cast<std::size_t>(x.atom)] < ranks[static_cast<std::size_t>(y.atom)];
        });
    }

    struct Closure {
        int bond;
        bool opener;
    };
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::vector<bool> closed(static_cast<std::size_t>(g.bond_count()), false);
    std::vector<std::vector<Neighbor>> children(static_cast<std::size_t>(n));
    std::vector<std::vector<Closure>> closures(static_cast<std::size_t>(n));

    std::function<void(int, int)> visit = [&](int u, int parent_bond) {
        visited[static_cast<std::size_t>(u)] = true;
        for (const auto& nb : sorted[static_cast<std::size_t>(u)]) {
            if (nb.bond == parent_bond) {
                continue;
            }
            if (visited[static_cast<std::size_t>(nb.atom)]) {
                if (!closed[static_cast<std::size_t>(nb.bond)]) {
                    closed[static_cast<std::size_t>(nb.bond)] = true;
                    closures[static_cast<std::size_t>(nb.atom)].push_back({nb.bond, true});
                    closures[static_cast<std::size_t>(u)].push_back({nb.bond, false});
                }
            } else {
                children[static_cast<std::size_t>(u)].push_back(nb);
                visit(nb.atom, nb.bond);
            }
        }
    };

    std::vector<int> digit_of_bond(static_cast<std::size_t>(g.bond_count()), -1);
    std::vector<bool> digit_used(100, false);
    std::string out;

    std::function<void(int)> write = [&](int u) {
        out += atom_token(g, u);
        for (const auto& c : closures[static_cast<std::size_t>(u)]) {
            if (!c.opener) {
                const int d = digit_of_bond[static_cast<std::size_t>(c.bond)];
                out += ring_label(d);
                digit_used[static_cast<std::size_t>(d)] = false;
            }
        }
        for (const auto& c : closures[static_cast<std::size_t>(u)]) {
            if (c.opener) {
                int d = 1;
                while (d < 100 && digit_used[static_cast<std::size_t>(d)]) {
                    ++d;
                }
                if (d >= 100) {
                    throw UnsupportedFeature("more than 99 simultaneously open rings");
                }
                digit_used[static_cast<std::size_t>(d)] = true;
                digit_of_bond[static_cast<std::size_t>(c.bond)] = d;
                out += bond_token(g, c.bond) + ring_label(d);
            }
        }
        const auto& kids = children[static_cast<std::size_t>(u)];
        for (std::size_t k = 0; k < kids.size(); ++k) {
            const bool last = k + 1 == kids.size();
            if (!last) {
                out += '(';
            }
            out += bond_token(g, kids[k].bond);
            write(kids[k].atom);
            if (!last) {
                out += ')';
            }
        }
    };

    std::vector<int> by_rank(static_cast<std::size_t>(n));
    std::iota(by_rank.begin(), by_rank.end(), 0);
    std::sort(by_rank.begin(), by_rank.end(),
              [&](int a, int b) { return ranks[static_cast<std::size_t>(a)] < ranks[static_cast<std::size_t>(b)]; });
    bool first = true;
    for (int start : by_rank) {
        if (visited[static_cast<std::size_t>(start)]) {
            continue;
        }
        visit(start, -1);
        if (!first) {
            out += '.';
        }
        first = false;
        write(start);
    }
    return out;
}

struct Search {
    const MolGraph& g;
    int leaf_budget;
    std::string best;
    bool have = false;

    void run(Ranks ranks)
    {
        ranks = refine(g, std::move(ranks));
        const std::size_t n = ranks.size();
        // smallest rank value shared by more than one atom
        std::vector<int> count(n, 0);
        for (int r : ranks) {
            ++count[static_cast<std::size_t>(r)];
        }
        int tied = -1;
        for (std::size_t r = 0; r < n; ++r) {
            if (count[r] > 1) {
                tied = static_cast<int>(r);
                break;
            }
        }
        if (tied < 0) {
            std::string s = emit(g, ranks);
            if (!have || s < best) {
                best = std::move(s);
                have = true;
            }
            --leaf_budget;
            return;
        }
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (ranks[i] != tied) {
                continue;
            }
            if (!first && leaf_budget <= 0) {
                break;
            }
            first = false;
            Ranks split = ranks;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i && split[j] == tied) {
                    split[j] = tied + 1;
                }
            }
            run(std::move(split));
        }
    }
};

} // namespace

std::string canonical_smiles(const MolGraph& g)
{
    for (const auto& b : g.bonds()) {
        if (b.order == kAromaticOrder) {
            throw PreconditionError("canonical_smiles needs a Kekulized graph with perceived aromaticity");
        }
    }
    if (g.atom_count() == 0) {
        return {};
    }
    // Ties left after refinement are broken by trying every member of the
    // lowest tied class and keeping the lexicographically smallest string.
    // Past the leaf budget only the first member is tried.
    Search search{g, 512, {}, false};
    search.run(initial_ranks(g));
    return search.best;
}

} // namespace staug::chem
