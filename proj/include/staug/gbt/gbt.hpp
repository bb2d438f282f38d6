#pragma once

#include "staug/descriptors/feature_matrix.hpp"

#include <cstdint>
#include <functional>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace staug::gbt {

struct GbtParams {
    int n_rounds = 300;
    int max_depth = 6;
    double learning_rate = 0.05;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
    double subsample = 0.8;
    double colsample = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    bool default_left = false;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

// Nodes are stored in creation order; node 0 is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    // Raw leaf output for one feature row (x < threshold goes left, NaN takes
    // the default direction).
    double evaluate(const double* row) const;
};

struct GbtModel {
    double base_score = 0.0;
    double learning_rate = 0.0;
    std::vector<Tree> trees;
    GbtParams params;
    std::size_t n_features = 0;
    // True when the observed targets were constant and no tree was grown.
    bool degenerate = false;

    double predict_row(const double* row) const;
};

// Per-round hook: called with (round index, training RMSE after the round).
using RoundCallback = std::function<void(int, double)>;

// Fits one regression target. Entries of y that are NaN are unobserved and
// their rows are dropped before fitting.
GbtModel fit_gbt(const desc::FeatureMatrix& x, std::span<const double> y, const GbtParams& params,
                 const RoundCallback& on_round = {});

std::vector<double> predict_gbt(const GbtModel& m, const desc::FeatureMatrix& x);

std::string model_to_json(const GbtModel& m);
GbtModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const GbtModel& m);
GbtModel load_model(const std::filesystem::path& path);

} // namespace staug::gbt
