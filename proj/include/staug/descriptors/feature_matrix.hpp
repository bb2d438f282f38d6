#pragma once

#include "staug/chem/mol_graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace staug::desc {

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, NaN = missing
    std::vector<std::string> col_names;
    std::vector<bool> arcsinh_applied; // one per current column
    // One entry per column of the unpruned schema; true = still present.
    std::vector<bool> kept_mask;
    std::string schema_id;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::vector<double> column(std::size_t c) const;
    std::vector<double> row(std::size_t r) const;
    // Keeps only the given rows, in the given order.
    FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const;
    // Fingerprint of names and values; used as a cache key.
    std::uint64_t fingerprint() const;
};

FeatureMatrix build_feature_matrix(const std::vector<chem::MolGraph>& mols, int threads = 1);

// Column-wise: a column whose largest observed |x| exceeds `threshold`
// (strictly) has every observed entry replaced by asinh(x).
FeatureMatrix arcsinh_pretransform(const FeatureMatrix& m, double threshold = 33.0);

struct PruneOptions {
    double var_eps = 1e-10;
    double corr_max = 0.999;
    // Pairs involving a column with missing entries need this many
    // pairwise-complete rows to be compared at all.
    std::size_t min_overlap = 10;
};

FeatureMatrix prune_features(const FeatureMatrix& m, const PruneOptions& opts = {});

// Pearson correlation over rows where both entries are observed; NaN when
// fewer than 2 such rows or either side is constant on them. `overlap`
// receives the number of complete rows.
double pairwise_pearson(const std::vector<double>& a, const std::vector<double>& b, std::size_t* overlap = nullptr);

// CSV: header = col_names, missing = empty cell, values round-trip exactly.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

// Binary cache: the whole matrix plus a caller-supplied dataset key. Loading
// returns false when the file is missing or was written for another
// schema/dataset.
void save_feature_cache(const std::filesystem::path& path, const FeatureMatrix& m, std::uint64_t dataset_key);
bool load_feature_cache(const std::filesystem::path& path, std::uint64_t dataset_key, FeatureMatrix& out);

} // namespace staug::desc
