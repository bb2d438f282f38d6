#include "staug/common/error.hpp"
#include "staug/common/rng.hpp"
#include "staug/gbt/gbt.hpp"

#include "oracles/gbt_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace staug;
using namespace staug::gbt;
using desc::FeatureMatrix;
using staug::test::exact_params;
using staug::test::rows_matrix;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

TEST(Gbt, ConstantTargetGivesBaseOnly)
{
    const auto x = rows_matrix({{0}, {1}, {2}});
    const std::vector<double> y{7, 7, 7};
    const auto m = fit_gbt(x, y, GbtParams{});
    EXPECT_DOUBLE_EQ(m.base_score, 7);
    EXPECT_TRUE(m.trees.empty());
    EXPECT_TRUE(m.degenerate);
    for (double p : predict_gbt(m, x)) {
        EXPECT_DOUBLE_EQ(p, 7);
    }
}

TEST(Gbt, DepthOneStump)
{
    const auto x = rows_matrix({{0}, {1}, {2}, {3}});
    const std::vector<double> y{0, 0, 10, 10};
    const auto m = fit_gbt(x, y, exact_params(1));
    ASSERT_EQ(m.trees.size(), 1U);
    const auto& root = m.trees[0].nodes[0];
    EXPECT_EQ(root.feature, 0);
    EXPECT_DOUBLE_EQ(root.threshold, 1.5);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[static_cast<std::size_t>(root.left)].leaf_value, -5);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[static_cast<std::size_t>(root.right)].leaf_value, 5);
    EXPECT_EQ(predict_gbt(m, x), (std::vector<double>{0, 0, 10, 10}));
}

TEST(Gbt, MissingValueGoesToGainMaximalSide)
{
    const auto x = rows_matrix({{0}, {1}, {2}, {kNaN}});
    const std::vector<double> y{0, 0, 10, 10};
    const auto m = fit_gbt(x, y, exact_params(1));
    const auto& root = m.trees[0].nodes[0];
    // routing right: G_L=10,H_L=2 | G_R=-10,H_R=2 -> 50; routing left: 25/3 + 25 -> 50/3
    EXPECT_FALSE(root.default_left);
    EXPECT_DOUBLE_EQ(root.threshold, 1.5);
    EXPECT_EQ(predict_gbt(m, x), (std::vector<double>{0, 0, 10, 10}));
    const auto all_missing = rows_matrix({{kNaN}});
    EXPECT_DOUBLE_EQ(predict_gbt(m, all_missing)[0], 10);
}

TEST(Gbt, ErrorsAndPreconditions)
{
    const auto x = rows_matrix({{0}, {1}, {2}});
    EXPECT_THROW(fit_gbt(x, std::vector<double>{1, 2}, GbtParams{}), DimensionMismatch);
    EXPECT_THROW(fit_gbt(x, std::vector<double>{1, kNaN, kNaN}, GbtParams{}), TooFewRows);
    GbtParams bad;
    bad.subsample = 0;
    EXPECT_THROW(fit_gbt(x, std::vector<double>{1, 2, 3}, bad), PreconditionError);
    const auto m = fit_gbt(x, std::vector<double>{1, 2, 3}, GbtParams{});
    EXPECT_THROW(predict_gbt(m, rows_matrix({{0, 1}})), DimensionMismatch);
}

TEST(Gbt, UnobservedRowsAreDropped)
{
    const auto x = rows_matrix({{0}, {1}, {2}, {3}, {4}});
    const std::vector<double> y{0, 0, kNaN, 10, 10};
    const auto m = fit_gbt(x, y, exact_params(1));
    EXPECT_DOUBLE_EQ(m.base_score, 5);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].threshold, 2);
}

TEST(Gbt, MatchesExhaustiveSearch)
{
    Rng rng(99);
    int split_trees = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto problem = staug::test::random_oracle_problem(rng);
        const auto m = fit_gbt(problem.x, problem.y, problem.params);
        EXPECT_EQ(staug::test::oracle_mismatch(problem, m), "") << "trial " << trial;
        split_trees += !m.degenerate && !m.trees[0].nodes[0].is_leaf() ? 1 : 0;
    }
    EXPECT_GT(split_trees, 150);
}

TEST(Gbt, TrainingLossIsMonotone)
{
    Rng rng(3);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 60, f = 5;
        std::vector<std::vector<double>> rows(n, std::vector<double>(f));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : rows[i]) {
                v = rng.bernoulli(0.1) ? kNaN : rng.normal();
            }
            y[i] = std::sin(3 * (std::isnan(rows[i][0]) ? 0 : rows[i][0])) + 0.3 * rng.normal();
        }
        GbtParams p;
        p.n_rounds = 40;
        p.max_depth = 3;
        p.learning_rate = 0.3;
        p.subsample = 1.0;
        p.colsample = 0.6;
        p.seed = static_cast<std::uint64_t>(trial);
        std::vector<double> rmse;
        fit_gbt(rows_matrix(rows), y, p, [&](int, double r) { rmse.push_back(r); });
        ASSERT_EQ(rmse.size(), 40U);
        for (std::size_t k = 1; k < rmse.size(); ++k) {
            EXPECT_LE(rmse[k], rmse[k - 1] + 1e-12) << "trial " << trial << " round " << k;
        }
    }
}

TEST(Gbt, DeterministicAndSerializable)
{
    Rng rng(8);
    std::vector<std::vector<double>> rows(80, std::vector<double>(6));
    std::vector<double> y(80);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto& v : rows[i]) {
            v = rng.bernoulli(0.2) ? kNaN : rng.normal();
        }
        y[i] = rng.normal();
    }
    const auto x = rows_matrix(rows);
    GbtParams p;
    p.n_rounds = 30;
    p.seed = 42;
    const auto a = fit_gbt(x, y, p);
    const auto b = fit_gbt(x, y, p);
    EXPECT_EQ(model_to_json(a), model_to_json(b));
    p.seed = 43;
    EXPECT_NE(model_to_json(a), model_to_json(fit_gbt(x, y, p)));

    const auto back = model_from_json(model_to_json(a));
    EXPECT_EQ(model_to_json(back), model_to_json(a));
    EXPECT_EQ(predict_gbt(back, x), predict_gbt(a, x));
    EXPECT_THROW(model_from_json("{}"), FormatError);
    EXPECT_THROW(model_from_json("not json"), FormatError);
}

TEST(Gbt, PredictionsFiniteForAnyMissingPattern)
{
    Rng rng(12);
    std::vector<std::vector<double>> rows(50, std::vector<double>(4));
    std::vector<double> y(50);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto& v : rows[i]) {
            v = rng.normal();
        }
        y[i] = rows[i][0] * 2 + rows[i][1];
    }
    GbtParams p;
    p.n_rounds = 20;
    const auto m = fit_gbt(rows_matrix(rows), y, p);
    for (int mask = 0; mask < 16; ++mask) {
        std::vector<double> row{0.5, -0.5, 1.0, 2.0};
        for (int k = 0; k < 4; ++k) {
            if (mask & (1 << k)) {
                row[static_cast<std::size_t>(k)] = kNaN;
            }
        }
        EXPECT_TRUE(std::isfinite(predict_gbt(m, rows_matrix({row}))[0]));
    }
}
