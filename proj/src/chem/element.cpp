#include "staug/chem/element.hpp"

#include <array>

namespace staug::chem {

namespace {

struct ElementInfo {
    std::string_view symbol;
    double mass;
};

constexpr std::array<ElementInfo, kMaxElement + 1> kElements{{
    {"*", 0.0},       {"H", 1.008},     {"He", 4.0026},   {"Li", 6.94},     {"Be", 9.0122},
    {"B", 10.81},     {"C", 12.011},    {"N", 14.007},    {"O", 15.999},    {"F", 18.998},
    {"Ne", 20.180},   {"Na", 22.990},   {"Mg", 24.305},   {"Al", 26.982},   {"Si", 28.085},
    {"P", 30.974},    {"S", 32.06},     {"Cl", 35.45},    {"Ar", 39.948},   {"K", 39.098},
    {"Ca", 40.078},   {"Sc", 44.956},   {"Ti", 47.867},   {"V", 50.942},    {"Cr", 51.996},
    {"Mn", 54.938},   {"Fe", 55.845},   {"Co", 58.933},   {"Ni", 58.693},   {"Cu", 63.546},
    {"Zn", 65.38},    {"Ga", 69.723},   {"Ge", 72.630},   {"As", 74.922},   {"Se", 78.971},
    {"Br", 79.904},   {"Kr", 83.798},   {"Rb", 85.468},   {"Sr", 87.62},    {"Y", 88.906},
    {"Zr", 91.224},   {"Nb", 92.906},   {"Mo", 95.95},    {"Tc", 98.0},     {"Ru", 101.07},
    {"Rh", 102.91},   {"Pd", 106.42},   {"Ag", 107.87},   {"Cd", 112.41},   {"In", 114.82},
    {"Sn", 118.71},   {"Sb", 121.76},   {"Te", 127.60},   {"I", 126.90},    {"Xe", 131.29},
    {"Cs", 132.91},   {"Ba", 137.33},   {"La", 138.91},   {"Ce", 140.12},   {"Pr", 140.91},
    {"Nd", 144.24},   {"Pm", 145.0},    {"Sm", 150.36},   {"Eu", 151.96},   {"Gd", 157.25},
    {"Tb", 158.93},   {"Dy", 162.50},   {"Ho", 164.93},   {"Er", 167.26},   {"Tm", 168.93},
    {"Yb", 173.05},   {"Lu", 174.97},   {"Hf", 178.49},   {"Ta", 180.95},   {"W", 183.84},
    {"Re", 186.21},   {"Os", 190.23},   {"Ir", 192.22},   {"Pt", 195.08},   {"Au", 196.97},
    {"Hg", 200.59},   {"Tl", 204.38},   {"Pb", 207.2},    {"Bi", 208.98},   {"Po", 209.0},
    {"At", 210.0},    {"Rn", 222.0},    {"Fr", 223.0},    {"Ra", 226.0},    {"Ac", 227.0},
    {"Th", 232.04},   {"Pa", 231.04},   {"U", 238.03},    {"Np", 237.0},    {"Pu", 244.0},
}};

constexpr std::array<int, 1> kVal1{1};
constexpr std::array<int, 1> kVal2{2};
constexpr std::array<int, 1> kVal3{3};
constexpr std::array<int, 1> kVal4{4};
constexpr std::array<int, 2> kVal35{3, 5};
constexpr std::array<int, 3> kVal246{2, 4, 6};

} // namespace

std::string_view element_symbol(int z)
{
    if (z < 1 || z > kMaxElement) {
        return "*";
    }
    return kElements[static_cast<std::size_t>(z)].symbol;
}

std::optional<int> element_from_symbol(std::string_view symbol)
{
    for (int z = 1; z <= kMaxElement; ++z) {
        if (kElements[static_cast<std::size_t>(z)].symbol == symbol) {
            return z;
        }
    }
    return std::nullopt;
}

double average_mass(int z)
{
    if (z < 1 || z > kMaxElement) {
        return 0.0;
    }
    return kElements[static_cast<std::size_t>(z)].mass;
}

bool is_organic(int z)
{
    switch (z) {
    case elem::H:
    case elem::B:
    case elem::C:
    case elem::N:
    case elem::O:
    case elem::F:
    case elem::Si:
    case elem::P:
    case elem::S:
    case elem::Cl:
    case elem::Br:
    case elem::I:
        return true;
    default:
        return false;
    }
}

bool is_halogen(int z) { return z == elem::F || z == elem::Cl || z == elem::Br || z == elem::I; }

std::span<const int> default_valences(int z)
{
    switch (z) {
    case elem::H:
    case elem::F:
    case elem::Cl:
    case elem::Br:
    case elem::I:
        return kVal1;
    case elem::O:
        return kVal2;
    case elem::B:
        return kVal3;
    case elem::C:
    case elem::Si:
        return kVal4;
    case elem::N:
    case elem::P:
        return kVal35;
    case elem::S:
        return kVal246;
    default:
        return {};
    }
}

std::span<const int> charged_valences(int z, int charge)
{
    if (charge == 0) {
        return default_valences(z);
    }
    const int shifted = z - charge;
    // keep the isoelectronic shift inside one period
    auto period = [](int x) { return x <= 2 ? 1 : x <= 10 ? 2 : x <= 18 ? 3 : x <= 36 ? 4 : 5; };
    if (shifted < 1 || period(shifted) != period(z)) {
        return {};
    }
    return default_valences(shifted);
}

} // namespace staug::chem
