#include "staug/chem/aromaticity.hpp"
#include "staug/chem/element.hpp"
#include "staug/chem/filters.hpp"
#include "staug/chem/rings.hpp"
#include "staug/chem/smiles.hpp"
#include "staug/common/error.hpp"

#include <gtest/gtest.h>

using namespace staug;
using namespace staug::chem;

TEST(ParseSmiles, MethaneHasFourImplicitHydrogens)
{
    const auto g = parse_smiles("C");
    ASSERT_EQ(g.atom_count(), 1);
    EXPECT_EQ(g.bond_count(), 0);
    EXPECT_EQ(g.atom(0).implicit_h, 4);
}

TEST(ParseSmiles, AromaticBenzene)
{
    const auto g = read_smiles("c1ccccc1");
    ASSERT_EQ(g.atom_count(), 6);
    ASSERT_EQ(g.bond_count(), 6);
    for (const auto& a : g.atoms()) {
        EXPECT_TRUE(a.aromatic);
        EXPECT_EQ(a.implicit_h, 1);
        EXPECT_TRUE(a.ring_member);
    }
    int doubles = 0;
    for (const auto& b : g.bonds()) {
        EXPECT_TRUE(b.aromatic);
        doubles += b.order == 2;
    }
    EXPECT_EQ(doubles, 3);
}

TEST(ParseSmiles, UnclosedRingIsSyntaxError) { EXPECT_THROW(parse_smiles("C1CC"), SyntaxError); }

TEST(ParseSmiles, GrammarErrors)
{
    EXPECT_THROW(parse_smiles(""), SyntaxError);
    EXPECT_THROW(parse_smiles("C(C"), SyntaxError);
    EXPECT_THROW(parse_smiles("CC)"), SyntaxError);
    EXPECT_THROW(parse_smiles("C11"), SyntaxError);
    EXPECT_THROW(parse_smiles("C=1CC-1"), SyntaxError);
    EXPECT_THROW(parse_smiles("CXC"), SyntaxError);
    EXPECT_THROW(parse_smiles("C=="), SyntaxError);
    EXPECT_THROW(parse_smiles("C()C"), SyntaxError);
    EXPECT_THROW(parse_smiles("[C"), SyntaxError);
    EXPECT_THROW(parse_smiles("C12CC12"), SyntaxError);
}

TEST(ParseSmiles, UnsupportedFeatures)
{
    EXPECT_THROW(parse_smiles("[13CH4]"), UnsupportedFeature);
    EXPECT_THROW(parse_smiles("C*"), UnsupportedFeature);
    EXPECT_THROW(parse_smiles("[*]C"), UnsupportedFeature);
}

TEST(ParseSmiles, ValenceError)
{
    EXPECT_THROW(parse_smiles("C(C)(C)(C)(C)C"), ValenceError);
    EXPECT_THROW(parse_smiles("FF=C"), ValenceError);
}

TEST(ParseSmiles, BracketAtoms)
{
    const auto g = parse_smiles("[NH4+]");
    EXPECT_EQ(g.atom(0).element, elem::N);
    EXPECT_EQ(g.atom(0).formal_charge, 1);
    EXPECT_EQ(g.atom(0).implicit_h, 4);
    const auto o = parse_smiles("C[O-]");
    EXPECT_EQ(o.atom(1).formal_charge, -1);
    EXPECT_EQ(o.atom(1).implicit_h, 0);
    EXPECT_EQ(parse_smiles("[Fe+++]").atom(0).formal_charge, 3);
    EXPECT_EQ(parse_smiles("[Cu+2]").atom(0).formal_charge, 2);
    EXPECT_EQ(parse_smiles("[Cl-]").atom(0).element, elem::Cl);
    EXPECT_EQ(parse_smiles("[Sc]").atom(0).element, 21);
}

TEST(ParseSmiles, StereoIsDiscarded)
{
    EXPECT_EQ(canonicalize("F/C=C/F"), canonicalize("FC=CF"));
    EXPECT_EQ(canonicalize("N[C@@H](C)C(=O)O"), canonicalize("NC(C)C(=O)O"));
    EXPECT_EQ(canonicalize("N[C@H](C)C(=O)O"), canonicalize("N[C@@H](C)C(=O)O"));
}

TEST(ParseSmiles, ExplicitHydrogensAreFolded)
{
    const auto g = parse_smiles("[H]C([H])([H])[H]");
    ASSERT_EQ(g.atom_count(), 1);
    EXPECT_EQ(g.atom(0).implicit_h, 4);
    EXPECT_EQ(canonicalize("[H]OC"), canonicalize("CO"));
}

TEST(ParseSmiles, TwoDigitRingClosures)
{
    EXPECT_EQ(canonicalize("C%10CCCCC%10"), canonicalize("C1CCCCC1"));
}

TEST(ParseSmiles, Fragments)
{
    const auto g = parse_smiles("[Na+].[Cl-]");
    EXPECT_EQ(g.atom_count(), 2);
    EXPECT_EQ(g.component_count(), 2);
    // ring bond spanning a dot is a bond
    EXPECT_EQ(parse_smiles("C1.C1").component_count(), 1);
}

TEST(Aromaticity, KekuleBenzeneIsAromatic)
{
    const auto g = read_smiles("C1=CC=CC=C1");
    for (const auto& a : g.atoms()) {
        EXPECT_TRUE(a.aromatic);
    }
    EXPECT_EQ(canonical_smiles(g), canonicalize("c1ccccc1"));
}

TEST(Aromaticity, CyclohexaneIsNot)
{
    for (const auto& a : read_smiles("C1CCCCC1").atoms()) {
        EXPECT_FALSE(a.aromatic);
    }
}

TEST(Aromaticity, PyridineNitrogenGivesOneElectron)
{
    const auto g = read_smiles("c1ccncc1");
    for (const auto& a : g.atoms()) {
        EXPECT_TRUE(a.aromatic);
    }
    EXPECT_EQ(g.atom(3).element, elem::N);
    EXPECT_EQ(g.atom(3).implicit_h, 0);
}

TEST(Aromaticity, FiveMemberedHeterocycles)
{
    for (const char* smi : {"c1cc[nH]c1", "c1ccoc1", "c1ccsc1", "c1ccc2[nH]ccc2c1", "Cn1cccc1"}) {
        const auto g = read_smiles(smi);
        for (const auto& a : g.atoms()) {
            if (a.ring_member) {
                EXPECT_TRUE(a.aromatic) << smi;
            }
        }
    }
}

TEST(Aromaticity, NonAromaticRings)
{
    for (const char* smi : {"C1=CCC=C1", "C1=CC=CC=CC=C1", "O=C1C=CC(=O)C=C1"}) {
        for (const auto& a : read_smiles(smi).atoms()) {
            EXPECT_FALSE(a.aromatic) << smi;
        }
    }
}

TEST(Aromaticity, PyridoneIsAromatic)
{
    const auto g = read_smiles("O=c1cccc[nH]1");
    EXPECT_TRUE(g.atom(1).aromatic);
    EXPECT_FALSE(g.atom(0).aromatic);
    EXPECT_EQ(canonicalize("O=C1C=CC=CN1"), canonical_smiles(g));
}

TEST(Aromaticity, FusedNaphthalene)
{
    const auto g = read_smiles("c1ccc2ccccc2c1");
    for (const auto& a : g.atoms()) {
        EXPECT_TRUE(a.aromatic);
    }
    EXPECT_EQ(canonicalize("C1=CC=C2C=CC=CC2=C1"), canonical_smiles(g));
}

TEST(Aromaticity, AzuleneResolvesPerRing)
{
    // per-ring rule: 5 and 7 electrons -> neither ring aromatic
    const auto g = read_smiles("c1ccc2cccc2cc1");
    for (const auto& a : g.atoms()) {
        EXPECT_FALSE(a.aromatic);
    }
    EXPECT_EQ(canonicalize(canonical_smiles(g)), canonical_smiles(g));
}

TEST(Aromaticity, InvalidAromaticInputFails)
{
    EXPECT_THROW(read_smiles("c1cccc1"), KekulizationError);
    EXPECT_THROW(read_smiles("c1ccnc1"), KekulizationError);
}

TEST(Aromaticity, Idempotent)
{
    for (const char* smi : {"c1ccccc1O", "c1ccc2ccccc2c1", "O=c1cccc[nH]1", "c1ccc2cccc2cc1", "CC(=O)Nc1ccc(O)cc1"}) {
        const auto once = read_smiles(smi);
        EXPECT_EQ(perceive_aromaticity(once), once) << smi;
    }
}

TEST(Rings, SssrSizes)
{
    const auto info = find_rings(read_smiles("c1ccc2ccccc2c1"));
    ASSERT_EQ(info.rings.size(), 2U);
    EXPECT_EQ(info.rings[0].size(), 6);
    EXPECT_EQ(info.rings[1].size(), 6);
    const auto cubane = find_rings(read_smiles("C12C3C4C1C5C2C3C45"));
    EXPECT_EQ(cubane.cyclomatic, 5);
    ASSERT_EQ(cubane.rings.size(), 5U);
    for (const auto& r : cubane.rings) {
        EXPECT_EQ(r.size(), 4);
    }
    const auto chain = find_rings(read_smiles("CCCC"));
    EXPECT_TRUE(chain.rings.empty());
}

TEST(Canonical, OrderInvariance)
{
    EXPECT_EQ(canonicalize("OCC"), canonicalize("CCO"));
    EXPECT_EQ(canonicalize("c1ccccc1C"), canonicalize("Cc1ccccc1"));
    EXPECT_EQ(canonicalize("OC(=O)c1ccccc1"), canonicalize("c1cc(C(O)=O)ccc1"));
    EXPECT_NE(canonicalize("CCO"), canonicalize("COC"));
}

TEST(Canonical, Examples)
{
    EXPECT_EQ(canonicalize("OCC"), "CCO");
    EXPECT_EQ(canonicalize("[Cl-].[Na+]"), canonicalize("[Na+].[Cl-]"));
}

TEST(AdmitMolecule, Filters)
{
    EXPECT_FALSE(admit_molecule(read_smiles("C"), false));
    EXPECT_FALSE(admit_molecule(read_smiles("C"), true));
    EXPECT_FALSE(admit_molecule(read_smiles("[Na+].[Cl-]"), false));
    EXPECT_TRUE(admit_molecule(read_smiles("[Na+].[Cl-]"), true));
    EXPECT_TRUE(admit_molecule(read_smiles("CCO"), false));
    EXPECT_EQ(admit_reason(read_smiles("O"), false), AdmitReason::SingleHeavyAtom);
    EXPECT_EQ(admit_reason(read_smiles("CC[Se]CC"), false), AdmitReason::MetalOrOther);
}
