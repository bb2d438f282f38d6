#include "staug/chem/aromaticity.hpp"
#include "staug/chem/element.hpp"
#include "staug/chem/rings.hpp"
#include "staug/chem/smiles.hpp"

#include "staug/common/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace staug::chem {

namespace {

struct RawAtom {
    Atom atom;
    bool bracket = false;
};

struct RingOpen {
    int atom;
    char bond;
};

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    MolGraph run()
    {
        if (s_.empty()) {
            throw SyntaxError("empty SMILES");
        }
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '(') {
                if (prev_ < 0) {
                    throw error("branch without a preceding atom");
                }
                if (pos_ + 1 < s_.size() && s_[pos_ + 1] == ')') {
                    throw error("empty branch");
                }
                if (pending_bond_) {
                    throw error("bond symbol before '('");
                }
                branches_.push_back(prev_);
                ++pos_;
            } else if (c == ')') {
                if (branches_.empty()) {
                    throw error("unbalanced ')'");
                }
                if (pending_bond_) {
                    throw error("dangling bond before ')'");
                }
                prev_ = branches_.back();
                branches_.pop_back();
                ++pos_;
            } else if (c == '.') {
                if (pending_bond_) {
                    throw error("dangling bond before '.'");
                }
                if (!branches_.empty()) {
                    throw error("'.' inside a branch");
                }
                prev_ = -1;
                ++pos_;
            } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
                if (pending_bond_) {
                    throw error("two consecutive bond symbols");
                }
                if (prev_ < 0) {
                    throw error("bond symbol without a preceding atom");
                }
                pending_bond_ = c;
                ++pos_;
            } else if (c == '$') {
                throw UnsupportedFeature("quadruple bonds are not supported");
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
                ring_closure();
            } else if (c == '[') {
                add_atom(bracket_atom());
            } else if (c == '*') {
                throw UnsupportedFeature("wildcard atom '*'");
            } else {
                add_atom(organic_atom());
            }
        }
        if (!branches_.empty()) {
            throw SyntaxError("unbalanced '(' in '" + std::string(s_) + "'");
        }
        if (!rings_.empty()) {
            throw SyntaxError("unclosed ring bond " + std::to_string(rings_.begin()->first) + " in '"
                              + std::string(s_) + "'");
        }
        if (pending_bond_) {
            throw SyntaxError("trailing bond symbol in '" + std::string(s_) + "'");
        }
        return finish();
    }

private:
    SyntaxError error(const std::string& msg) const
    {
        return SyntaxError(msg + " at position " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
    }

    void add_atom(RawAtom a)
    {
        atoms_.push_back(a);
        const int idx = static_cast<int>(atoms_.size()) - 1;
        if (prev_ >= 0) {
            add_bond(prev_, idx, pending_bond_);
        }
        pending_bond_ = 0;
        prev_ = idx;
    }

    void add_bond(int a, int b, char symbol)
    {
        if (a == b) {
            throw error("ring closure to the same atom");
        }
        for (const auto& [x, y, o] : bonds_) {
            if ((x == a && y == b) || (x == b && y == a)) {
                throw error("duplicate bond between the same atoms");
            }
        }
        const bool both_aromatic = atoms_[static_cast<std::size_t>(a)].atom.aromatic
                                   && atoms_[static_cast<std::size_t>(b)].atom.aromatic;
        int order = 1;
        switch (symbol) {
        case 0:
            order = both_aromatic ? kAromaticOrder : 1;
            break;
        case '-':
        case '/':
        case '\\':
            order = 1;
            break;
        case '=':
            order = 2;
            break;
        case '#':
            order = 3;
            break;
        case ':':
            if (!both_aromatic) {
                throw error("aromatic bond between non-aromatic atoms");
            }
            order = kAromaticOrder;
            break;
        default:
            throw error("unknown bond symbol");
        }
        bonds_.push_back({a, b, order});
    }

    void ring_closure()
    {
        int number = 0;
        if (s_[pos_] == '%') {
            if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))
                || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
                throw error("'%' must be followed by two digits");
            }
            number = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
            pos_ += 3;
        } else {
            number = s_[pos_] - '0';
            ++pos_;
        }
        if (prev_ < 0) {
            throw error("ring bond without a preceding atom");
        }
        auto it = rings_.find(number);
        if (it == rings_.end()) {
            rings_[number] = {prev_, pending_bond_};
        } else {
            const char open = it->second.bond;
            char symbol = pending_bond_;
            auto norm = [](char c) { return (c == '/' || c == '\\') ? '-' : c; };
            if (open && symbol && norm(open) != norm(symbol)) {
                throw error("conflicting ring bond symbols");
            }
            if (!symbol) {
                symbol = open;
            }
            add_bond(it->second.atom, prev_, symbol);
            rings_.erase(it);
        }
        pending_bond_ = 0;
    }

    RawAtom organic_atom()
    {
        const char c = s_[pos_];
        RawAtom a;
        auto take = [&](int z, std::size_t len, bool aromatic) {
            a.atom.element = z;
            a.atom.aromatic = aromatic;
            pos_ += len;
        };
        const char next = pos_ + 1 < s_.size() ? s_[pos_ + 1] : '\0';
        switch (c) {
        case 'B':
            next == 'r' ? take(elem::Br, 2, false) : take(elem::B, 1, false);
            break;
        case 'C':
            next == 'l' ? take(elem::Cl, 2, false) : take(elem::C, 1, false);
            break;
        case 'N': take(elem::N, 1, false); break;
        case 'O': take(elem::O, 1, false); break;
        case 'P': take(elem::P, 1, false); break;
        case 'S': take(elem::S, 1, false); break;
        case 'F': take(elem::F, 1, false); break;
        case 'I': take(elem::I, 1, false); break;
        case 'b': take(elem::B, 1, true); break;
        case 'c': take(elem::C, 1, true); break;
        case 'n': take(elem::N, 1, true); break;
        case 'o': take(elem::O, 1, true); break;
        case 'p': take(elem::P, 1, true); break;
        case 's': take(elem::S, 1, true); break;
        default:
            throw error(std::string("unknown token '") + c + "'");
        }
        return a;
    }

    RawAtom bracket_atom()
    {
        ++pos_; // '['
        RawAtom a;
        a.bracket = true;
        auto peek = [&]() -> char { return pos_ < s_.size() ? s_[pos_] : '\0'; };

        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            throw UnsupportedFeature("isotope labels are not supported in '" + std::string(s_) + "'");
        }
        const char c = peek();
        if (c == '*') {
            throw UnsupportedFeature("wildcard atom '*'");
        }
        if (std::islower(static_cast<unsigned char>(c))) {
            static constexpr std::pair<std::string_view, int> kAromatic[] = {
                {"se", elem::Se}, {"as", elem::As}, {"te", elem::Te}, {"b", elem::B},
                {"c", elem::C},   {"n", elem::N},   {"o", elem::O},   {"p", elem::P},
                {"s", elem::S}};
            bool found = false;
            for (const auto& [sym, z] : kAromatic) {
                if (s_.substr(pos_, sym.size()) == sym) {
                    a.atom.element = z;
                    a.atom.aromatic = true;
                    pos_ += sym.size();
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw error("unknown aromatic symbol");
            }
        } else if (std::isupper(static_cast<unsigned char>(c))) {
            std::optional<int> z;
            if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
                z = element_from_symbol(s_.substr(pos_, 2));
                if (z) {
                    pos_ += 2;
                }
            }
            if (!z) {
                z = element_from_symbol(s_.substr(pos_, 1));
                if (!z) {
                    throw error("unknown element");
                }
                ++pos_;
            }
            a.atom.element = *z;
        } else {
            throw error("expected element symbol in bracket atom");
        }

        if (peek() == '@') {
            ++pos_;
            if (peek() == '@') {
                ++pos_;
            } else {
                for (std::string_view cls : {"TH", "AL", "SP", "TB", "OH"}) {
                    if (s_.substr(pos_, 2) == cls) {
                        pos_ += 2;
                        while (std::isdigit(static_cast<unsigned char>(peek()))) {
                            ++pos_;
                        }
                        break;
                    }
                }
            }
        }
        if (peek() == 'H') {
            ++pos_;
            int h = 1;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                h = 0;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    h = h * 10 + (s_[pos_] - '0');
                    ++pos_;
                }
            }
            a.atom.implicit_h = h;
        }
        if (peek() == '+' || peek() == '-') {
            const char sign = peek();
            ++pos_;
            int magnitude = 1;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                magnitude = 0;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    magnitude = magnitude * 10 + (s_[pos_] - '0');
                    ++pos_;
                }
            } else {
                while (peek() == sign) {
                    ++magnitude;
                    ++pos_;
                }
            }
            a.atom.formal_charge = sign == '+' ? magnitude : -magnitude;
        }
        if (peek() == ':') {
            ++pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                throw error("atom class needs digits");
            }
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                ++pos_;
            }
        }
        if (peek() != ']') {
            throw error("unterminated bracket atom");
        }
        ++pos_;
        return a;
    }

    MolGraph finish()
    {
        const int n = static_cast<int>(atoms_.size());
        std::vector<int> bond_sum(static_cast<std::size_t>(n), 0);
        for (const auto& [a, b, order] : bonds_) {
            const int o = order == kAromaticOrder ? 1 : order;
            bond_sum[static_cast<std::size_t>(a)] += o;
            bond_sum[static_cast<std::size_t>(b)] += o;
        }
        for (int i = 0; i < n; ++i) {
            auto& ra = atoms_[static_cast<std::size_t>(i)];
            if (ra.bracket) {
                continue;
            }
            const auto valences = default_valences(ra.atom.element);
            const int used = bond_sum[static_cast<std::size_t>(i)];
            if (ra.atom.aromatic && used + 1 <= valences.front()) {
                ra.atom.implicit_h = valences.front() - used - 1;
                continue;
            }
            auto it = std::find_if(valences.begin(), valences.end(), [&](int v) { return v >= used; });
            if (it == valences.end()) {
                throw ValenceError(std::string(element_symbol(ra.atom.element)) + " atom " + std::to_string(i)
                                   + " has bond order sum " + std::to_string(used) + " in '" + std::string(s_)
                                   + "'");
            }
            ra.atom.implicit_h = *it - used;
        }

        // Fold neutral [H] atoms bonded to exactly one non-hydrogen atom.
        std::vector<int> degree(static_cast<std::size_t>(n), 0);
        for (const auto& [a, b, o] : bonds_) {
            ++degree[static_cast<std::size_t>(a)];
            ++degree[static_cast<std::size_t>(b)];
        }
        std::vector<bool> drop(static_cast<std::size_t>(n), false);
        for (const auto& [a, b, o] : bonds_) {
            for (auto [h, heavy] : {std::pair{a, b}, std::pair{b, a}}) {
                const auto& ha = atoms_[static_cast<std::size_t>(h)].atom;
                const auto& hv = atoms_[static_cast<std::size_t>(heavy)].atom;
                if (ha.element == elem::H && ha.formal_charge == 0 && ha.implicit_h == 0 && o == 1
                    && degree[static_cast<std::size_t>(h)] == 1 && hv.element != elem::H) {
                    drop[static_cast<std::size_t>(h)] = true;
                }
            }
        }
        std::vector<int> remap(static_cast<std::size_t>(n), -1);
        std::vector<Atom> atoms;
        for (int i = 0; i < n; ++i) {
            if (!drop[static_cast<std::size_t>(i)]) {
                remap[static_cast<std::size_t>(i)] = static_cast<int>(atoms.size());
                atoms.push_back(atoms_[static_cast<std::size_t>(i)].atom);
            }
        }
        std::vector<Bond> bonds;
        for (const auto& [a, b, o] : bonds_) {
            if (drop[static_cast<std::size_t>(a)]) {
                ++atoms[static_cast<std::size_t>(remap[static_cast<std::size_t>(b)])].implicit_h;
            } else if (drop[static_cast<std::size_t>(b)]) {
                ++atoms[static_cast<std::size_t>(remap[static_cast<std::size_t>(a)])].implicit_h;
            } else {
                Bond bond;
                bond.begin = remap[static_cast<std::size_t>(a)];
                bond.end = remap[static_cast<std::size_t>(b)];
                bond.order = o;
                bond.aromatic = o == kAromaticOrder;
                bonds.push_back(bond);
            }
        }
        MolGraph g(std::move(atoms), std::move(bonds));
        const auto ring = ring_bonds(g);
        std::vector<Atom> flagged(g.atoms().begin(), g.atoms().end());
        for (int b = 0; b < g.bond_count(); ++b) {
            if (ring[static_cast<std::size_t>(b)]) {
                flagged[static_cast<std::size_t>(g.bond(b).begin)].ring_member = true;
                flagged[static_cast<std::size_t>(g.bond(b).end)].ring_member = true;
            }
        }
        return MolGraph(std::move(flagged), std::vector<Bond>(g.bonds().begin(), g.bonds().end()));
    }

    struct RawBond {
        int a;
        int b;
        int order;
    };

    std::string_view s_;
    std::size_t pos_ = 0;
    int prev_ = -1;
    char pending_bond_ = 0;
    std::vector<int> branches_;
    std::map<int, RingOpen> rings_;
    std::vector<RawAtom> atoms_;
    std::vector<RawBond> bonds_;
};

} // namespace

MolGraph parse_smiles(std::string_view text) { return Parser(text).run(); }

MolGraph read_smiles(std::string_view text) { return perceive_aromaticity(parse_smiles(text)); }

std::string canonicalize(std::string_view text) { return canonical_smiles(read_smiles(text)); }

} // namespace staug::chem
