#include "staug/chem/smiles.hpp"
#include "staug/common/error.hpp"
#include "staug/common/rng.hpp"
#include "staug/descriptors/descriptors.hpp"
#include "staug/descriptors/feature_matrix.hpp"

#include "oracles/graph_oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>

using namespace staug;
using namespace staug::desc;
using chem::Atom;
using chem::Bond;
using chem::MolGraph;
using staug::test::carbon_graph;
using staug::test::random_connected;

namespace {

double value(const MolGraph& g, std::string_view name)
{
    const int idx = schema_index(name);
    EXPECT_GE(idx, 0) << name;
    return compute_descriptors(g).values[static_cast<std::size_t>(idx)];
}

double value(std::string_view smiles, std::string_view name) { return value(chem::read_smiles(smiles), name); }

void expect_rel(double actual, double expected, double tol)
{
    EXPECT_LE(std::fabs(actual - expected), tol * std::max(1.0, std::fabs(expected))) << actual << " vs " << expected;
}

FeatureMatrix matrix(const std::vector<std::vector<double>>& columns)
{
    FeatureMatrix m;
    m.cols = columns.size();
    m.rows = columns.front().size();
    m.data.resize(m.rows * m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) {
        m.col_names.push_back("f" + std::to_string(c));
        for (std::size_t r = 0; r < m.rows; ++r) {
            m.at(r, c) = columns[c][r];
        }
    }
    m.arcsinh_applied.assign(m.cols, false);
    m.kept_mask.assign(m.cols, true);
    return m;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST(Schema, NamesUniqueAndIndexed)
{
    const auto names = schema();
    EXPECT_GE(names.size(), 60U);
    EXPECT_LE(names.size(), 80U);
    for (std::size_t i = 0; i < names.size(); ++i) {
        EXPECT_EQ(schema_index(names[i]), static_cast<int>(i));
    }
    EXPECT_EQ(schema_index("nope"), -1);
}

TEST(Descriptors, PropaneTopology)
{
    const auto g = chem::read_smiles("CCC");
    EXPECT_DOUBLE_EQ(topo::wiener_index(g), 4.0);
    EXPECT_DOUBLE_EQ(topo::zagreb_m1(g), 6.0);
    EXPECT_DOUBLE_EQ(topo::zagreb_m2(g), 4.0);
    EXPECT_NEAR(topo::balaban_j(g), 4.0 / std::sqrt(6.0), 1e-12);
    EXPECT_NEAR(topo::balaban_j(g), 1.63299, 1e-5);
    EXPECT_DOUBLE_EQ(value(g, "WPath"), 4.0);
    EXPECT_DOUBLE_EQ(value(g, "Zagreb1"), 6.0);
    EXPECT_TRUE(std::isnan(value(g, "Kier3")));
}

TEST(Descriptors, McGowanMethane)
{
    std::vector<Atom> atoms{Atom{6, 0, false, 4, false}};
    const MolGraph ch4(atoms, {});
    EXPECT_NEAR(topo::mcgowan_volume(ch4), (16.35 + 4 * 8.71 - 4 * 6.56) / 100.0, 1e-12);
    EXPECT_NEAR(topo::mcgowan_volume(ch4), 0.2495, 1e-12);
}

TEST(Descriptors, McGowanMissingForMetals)
{
    EXPECT_TRUE(std::isnan(value("CC(=O)[O-].[Na+]", "VMcGowan")));
}

TEST(Descriptors, CountsAndWeights)
{
    EXPECT_DOUBLE_EQ(value("c1ccccc1", "nAromAtom"), 6);
    EXPECT_DOUBLE_EQ(value("c1ccccc1", "nAromRing"), 1);
    EXPECT_DOUBLE_EQ(value("c1ccccc1", "nBondsA"), 6);
    EXPECT_DOUBLE_EQ(value("c1ccccc1", "nH"), 6);
    EXPECT_NEAR(value("c1ccccc1", "MW"), 6 * 12.011 + 6 * 1.008, 1e-9);
    EXPECT_NEAR(value("c1ccccc1", "AMW"), (6 * 12.011 + 6 * 1.008) / 12, 1e-9);
    EXPECT_DOUBLE_EQ(value("CCCC", "nRot"), 1);
    EXPECT_DOUBLE_EQ(value("CC#CC", "nRot"), 0);
    EXPECT_DOUBLE_EQ(value("CCOCC", "nRot"), 2);
    EXPECT_DOUBLE_EQ(value("CCOCC", "FlexibilityIndex"), 2.0 / 5.0);
    EXPECT_DOUBLE_EQ(value("ClCCBr", "nX"), 2);
    EXPECT_DOUBLE_EQ(value("c1ccncc1", "nHRing"), 1);
    EXPECT_DOUBLE_EQ(value("C1CCCC1", "n5Ring"), 1);
    EXPECT_DOUBLE_EQ(value("OCCN", "nHBDon"), 2);
    EXPECT_DOUBLE_EQ(value("c1cc[nH]c1", "nHBAcc"), 0);
    EXPECT_DOUBLE_EQ(value("c1ccncc1", "nHBAcc"), 1);
}

TEST(Descriptors, TopoPsaTable)
{
    EXPECT_NEAR(value("c1ccccc1", "TopoPSA"), 0.0, 1e-12);
    EXPECT_NEAR(value("Oc1ccccc1", "TopoPSA"), 20.23, 1e-9);
    EXPECT_NEAR(value("c1ccncc1", "TopoPSA"), 12.89, 1e-9);
    EXPECT_NEAR(value("CC(=O)O", "TopoPSA"), 37.30, 1e-9);
    EXPECT_NEAR(value("c1ccccc1[N+](=O)[O-]", "TopoPSA"), 43.14, 1e-9);
    EXPECT_NEAR(value("CC#N", "TopoPSA"), 23.79, 1e-9);
    EXPECT_NEAR(value("CCN", "TopoPSA"), 26.02, 1e-9);
    EXPECT_NEAR(value("c1cc[nH]c1", "TopoPSA"), 15.79, 1e-9);
    EXPECT_NEAR(value("C1CO1", "TopoPSA"), 12.53, 1e-9);
}

TEST(Descriptors, InformationContent)
{
    // CH4 at radius 0: classes {C:1, H:4}
    const double p = 0.2;
    const double ic0 = -(p * std::log2(p) + 0.8 * std::log2(0.8));
    EXPECT_NEAR(value("C.C", "IC0"), ic0, 1e-12);
    EXPECT_NEAR(value("C.C", "TIC0"), 10 * ic0, 1e-12);
    // ethane: all carbons equivalent, all hydrogens equivalent at every radius
    for (const char* name : {"IC0", "IC1", "IC2"}) {
        EXPECT_NEAR(value("CC", name), -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75)), 1e-12) << name;
    }
    // propane distinguishes CH3 from CH2 from radius 1 on
    EXPECT_GT(value("CCC", "IC1"), value("CCC", "IC0"));
}

TEST(Descriptors, AutocorrelationLagOne)
{
    // propane: two C-C pairs at distance 1, one at distance 2
    const double mc = 12.011;
    EXPECT_NEAR(value("CCC", "ATS1m"), 2 * mc * mc, 1e-9);
    EXPECT_NEAR(value("CCC", "ATS2m"), mc * mc, 1e-9);
    EXPECT_DOUBLE_EQ(value("CCC", "ATS1d"), 4);
    EXPECT_DOUBLE_EQ(value("CCC", "ATS2d"), 1);
    EXPECT_DOUBLE_EQ(value("CCC", "ATS3d"), 0);
}

TEST(Descriptors, DisconnectedBalabanIsMissing)
{
    EXPECT_TRUE(std::isnan(value("CC.CC", "BalabanJ")));
    EXPECT_DOUBLE_EQ(value("CC.CC", "WPath"), 2);
}

TEST(Descriptors, RandomGraphsAgainstFloydWarshall)
{
    Rng rng(20240601);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(18));
        const auto g = random_connected(rng, n, static_cast<int>(rng.index(5)));
        const auto ref = staug::test::graph_reference(g);
        expect_rel(topo::wiener_index(g), ref.wiener, 1e-9);
        expect_rel(topo::zagreb_m1(g), ref.zagreb1, 1e-9);
        expect_rel(topo::zagreb_m2(g), ref.zagreb2, 1e-9);
        expect_rel(topo::eccentric_connectivity(g), ref.eccentric, 1e-9);
        expect_rel(topo::balaban_j(g), ref.balaban, 1e-9);
    }
}

TEST(Descriptors, PathGraphChiAndKappa)
{
    for (int n = 2; n <= 12; ++n) {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i + 1 < n; ++i) {
            edges.emplace_back(i, i + 1);
        }
        const auto g = carbon_graph(n, edges);
        // direct enumeration on the path: paths of length k are windows [i, i+k]
        auto deg = [&](int i) { return (i == 0 || i == n - 1) ? 1.0 : 2.0; };
        for (int k = 0; k <= 3; ++k) {
            double chi = 0;
            for (int i = 0; i + k < n; ++i) {
                double prod = 1;
                for (int t = i; t <= i + k; ++t) {
                    prod *= deg(t);
                }
                chi += 1 / std::sqrt(prod);
            }
            EXPECT_NEAR(topo::chi_path(g, k), chi, 1e-12) << n << " " << k;
            EXPECT_EQ(topo::path_count(g, k), std::max(0, n - k));
        }
        EXPECT_NEAR(topo::kappa(g, 1), n, 1e-12);
        if (n >= 3) {
            EXPECT_NEAR(topo::kappa(g, 2), n - 1, 1e-12);
        } else {
            EXPECT_TRUE(std::isnan(topo::kappa(g, 2)));
        }
        if (n >= 4) {
            const double k3 = (n % 2 == 1) ? n - 1.0 : (n - 2.0) * (n - 2.0) / (n - 3.0);
            EXPECT_NEAR(topo::kappa(g, 3), k3, 1e-12);
        } else {
            EXPECT_TRUE(std::isnan(topo::kappa(g, 3)));
        }
    }
}

TEST(Descriptors, PermutationInvariantOnCorpus)
{
    Rng rng(7);
    for (const auto& smi : test::load_corpus()) {
        const auto g = chem::read_smiles(smi);
        const auto ref = compute_descriptors(g).values;
        for (int k = 0; k < 3; ++k) {
            const auto perm = test::random_permutation(g.atom_count(), rng);
            const auto other = compute_descriptors(g.permuted(perm)).values;
            for (std::size_t c = 0; c < ref.size(); ++c) {
                const bool both_nan = std::isnan(ref[c]) && std::isnan(other[c]);
                EXPECT_TRUE(both_nan || ref[c] == other[c]) << smi << " " << schema()[c] << " " << ref[c]
                                                            << " vs " << other[c];
            }
        }
    }
}

TEST(FeatureMatrixTest, BuildRowsMatchDescriptors)
{
    const std::vector<MolGraph> mols{chem::read_smiles("CCO"), chem::read_smiles("c1ccccc1"),
                                     chem::read_smiles("CCO")};
    const auto m = build_feature_matrix(mols);
    ASSERT_EQ(m.rows, 3U);
    ASSERT_EQ(m.cols, schema_size());
    EXPECT_EQ(m.schema_id, kSchemaId);
    EXPECT_TRUE(same_bits(m.row(0), m.row(2)));
    EXPECT_TRUE(same_bits(m.row(1), compute_descriptors(mols[1]).values));
    EXPECT_THROW(build_feature_matrix({}), PreconditionError);

    const auto single = build_feature_matrix({mols[0]});
    EXPECT_EQ(single.rows, 1U);
    EXPECT_EQ(single.cols, schema_size());
}

TEST(FeatureMatrixTest, ParallelBuildIsDeterministic)
{
    std::vector<MolGraph> mols;
    for (const auto& s : test::load_corpus()) {
        mols.push_back(chem::read_smiles(s));
    }
    const auto a = build_feature_matrix(mols, 1);
    const auto b = build_feature_matrix(mols, 4);
    EXPECT_TRUE(same_bits(a.data, b.data));
}

TEST(Arcsinh, ColumnWiseStrictThreshold)
{
    const double nan = std::nan("");
    const auto m = matrix({{0, 0, 0}, {1, 100, nan}, {33, -33, 2}, {-40, 1, 2}});
    const auto t = arcsinh_pretransform(m);
    EXPECT_EQ(t.column(0), m.column(0));
    EXPECT_FALSE(t.arcsinh_applied[0]);
    EXPECT_TRUE(t.arcsinh_applied[1]);
    EXPECT_NEAR(t.at(1, 1), std::log(100 + std::sqrt(10001.0)), 1e-12);
    EXPECT_NEAR(t.at(1, 1), 5.29834, 1e-5);
    EXPECT_DOUBLE_EQ(t.at(0, 1), std::asinh(1.0));
    EXPECT_TRUE(std::isnan(t.at(2, 1)));
    EXPECT_FALSE(t.arcsinh_applied[2]);
    EXPECT_TRUE(same_bits(t.column(2), m.column(2)));
    EXPECT_TRUE(t.arcsinh_applied[3]);
    EXPECT_THROW(arcsinh_pretransform(m, 0.0), PreconditionError);
}

TEST(Arcsinh, MonotoneAndConditionallyIdempotent)
{
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> col(20);
        const double scale = rng.uniform(1, 1e6);
        for (auto& x : col) {
            x = rng.uniform(-scale, scale);
        }
        const auto m = matrix({col});
        const auto t = arcsinh_pretransform(m);
        for (std::size_t i = 0; i < col.size(); ++i) {
            for (std::size_t j = 0; j < col.size(); ++j) {
                if (col[i] < col[j]) {
                    EXPECT_LT(t.at(i, 0), t.at(j, 0));
                }
            }
        }
        double peak = 0;
        for (double x : t.column(0)) {
            peak = std::max(peak, std::fabs(x));
        }
        const auto twice = arcsinh_pretransform(t);
        if (peak <= 33.0) {
            EXPECT_TRUE(same_bits(twice.data, t.data));
        } else {
            EXPECT_FALSE(same_bits(twice.data, t.data));
        }
    }
}

TEST(Prune, SpecExamples)
{
    const auto constant = matrix({{5, 5, 5}, {1, 2, 3}});
    auto p = prune_features(constant);
    EXPECT_EQ(p.col_names, std::vector<std::string>{"f1"});
    EXPECT_EQ(p.kept_mask, (std::vector<bool>{false, true}));

    const auto identical = matrix({{1, 2, 4}, {1, 2, 4}});
    EXPECT_EQ(prune_features(identical).col_names, std::vector<std::string>{"f0"});

    // r = -1 computed independently
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{3, 2, 1};
    const double ma = 2, mb = 2;
    double sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < 3; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    EXPECT_DOUBLE_EQ(sab / std::sqrt(saa * sbb), -1.0);
    EXPECT_DOUBLE_EQ(pairwise_pearson(a, b), -1.0);
    PruneOptions opts;
    opts.corr_max = 0.999;
    EXPECT_EQ(prune_features(matrix({a, b}), opts).col_names, std::vector<std::string>{"f0"});
}

TEST(Prune, LowVarianceAndEmpty)
{
    const auto m = matrix({{1, 1 + 1e-7, 1}, {0, 1, 5}});
    EXPECT_EQ(prune_features(m).col_names, std::vector<std::string>{"f1"});
    EXPECT_THROW(prune_features(matrix({{1, 1, 1}, {2, 2, 2}})), EmptyResult);
    EXPECT_THROW(prune_features(matrix({{1}, {2}})), PreconditionError);
}

TEST(Prune, MissingValuesNeedOverlap)
{
    const double nan = std::nan("");
    // correlated on only 5 complete rows: not compared
    const auto few = matrix({{1, 2, 3, 4, 5, nan, 7}, {2, 4, 6, 8, 10, 3, nan}});
    EXPECT_EQ(prune_features(few).cols, 2U);
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) {
        a.push_back(i);
        b.push_back(2.0 * i + 1);
    }
    b[0] = nan;
    EXPECT_EQ(prune_features(matrix({a, b})).cols, 1U);
}

TEST(Prune, RandomMatricesSatisfyPostconditions)
{
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t rows = 15;
        std::vector<std::vector<double>> cols;
        for (int c = 0; c < 12; ++c) {
            std::vector<double> col(rows);
            const int kind = static_cast<int>(rng.index(4));
            for (std::size_t r = 0; r < rows; ++r) {
                if (kind == 0) {
                    col[r] = 3.0;
                } else if (kind == 1 && c > 0) {
                    col[r] = -2.0 * cols[0][r] + 1.0;
                } else {
                    col[r] = rng.normal();
                }
                if (rng.bernoulli(0.05)) {
                    col[r] = std::nan("");
                }
            }
            cols.push_back(col);
        }
        FeatureMatrix p;
        try {
            p = prune_features(matrix(cols));
        } catch (const EmptyResult&) {
            continue;
        }
        PruneOptions opts;
        for (std::size_t i = 0; i < p.cols; ++i) {
            const auto ci = p.column(i);
            double lo = INFINITY, hi = -INFINITY;
            for (double x : ci) {
                if (!std::isnan(x)) {
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
            }
            EXPECT_LT(lo, hi);
            for (std::size_t j = i + 1; j < p.cols; ++j) {
                std::size_t overlap = 0;
                const double r = pairwise_pearson(ci, p.column(j), &overlap);
                if (overlap >= opts.min_overlap && !std::isnan(r)) {
                    EXPECT_LE(std::fabs(r), opts.corr_max);
                }
            }
        }
        // survivors keep their relative order
        for (std::size_t i = 1; i < p.cols; ++i) {
            EXPECT_LT(std::stoi(p.col_names[i - 1].substr(1)), std::stoi(p.col_names[i].substr(1)));
        }
    }
}

TEST(FeatureIo, CsvAndCacheRoundTrip)
{
    const std::vector<MolGraph> mols{chem::read_smiles("CCO"), chem::read_smiles("CC")};
    const auto m = build_feature_matrix(mols);
    const auto dir = std::filesystem::temp_directory_path() / "staug_feature_io";
    std::filesystem::create_directories(dir);
    write_feature_csv(dir / "f.csv", m);
    const auto back = read_feature_csv(dir / "f.csv");
    EXPECT_EQ(back.col_names, m.col_names);
    EXPECT_TRUE(same_bits(back.data, m.data));

    save_feature_cache(dir / "f.bin", m, 99);
    FeatureMatrix loaded;
    EXPECT_FALSE(load_feature_cache(dir / "f.bin", 100, loaded));
    ASSERT_TRUE(load_feature_cache(dir / "f.bin", 99, loaded));
    EXPECT_TRUE(same_bits(loaded.data, m.data));
    EXPECT_EQ(loaded.fingerprint(), m.fingerprint());
    EXPECT_FALSE(load_feature_cache(dir / "missing.bin", 99, loaded));
    std::filesystem::remove_all(dir);
}
