#pragma once

#include "staug/descriptors/feature_matrix.hpp"
#include "staug/gbt/gbt.hpp"
#include "staug/gt/model.hpp"
#include "staug/pipeline/audit.hpp"
#include "staug/pipeline/cv_plan.hpp"
#include "staug/pipeline/dataset.hpp"
#include "staug/report/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace staug::pipeline {

enum class Mode { Xgb, GtNaive, GtSta };

// Literal: every molecule's synthetic value is the mean of all k fold
// teachers. OutOfFold: only the teacher that did not train on the molecule.
enum class SyntheticMode { Literal, OutOfFold };

const char* to_string(Mode m);
// Accepts the CLI spellings xgb, gt, gt-sta and the report names.
Mode mode_from_string(const std::string& s);
const char* to_string(SyntheticMode m);
SyntheticMode synthetic_mode_from_string(const std::string& s);
// Report name: xgb, gt_naive, gt_sta (literal) or gt_sta_oof.
std::string report_name(Mode m, SyntheticMode s = SyntheticMode::Literal);

struct FeatureOptions {
    double arcsinh_threshold = 33.0;
    desc::PruneOptions prune;
};

struct ExperimentConfig {
    gbt::GbtParams gbt;
    gt::GtConfig gt; // n_tasks and seed are set per run
    std::vector<std::uint64_t> seeds = kDefaultSeeds;
    int k = 5;
    std::vector<SyntheticMode> synthetic{SyntheticMode::Literal};
    double val_fraction = 0.1;
    FeatureOptions features;
    int threads = 1;

    void validate() const;
};

// Descriptors -> arcsinh -> prune, all unsupervised over every row.
desc::FeatureMatrix prepare_features(const std::vector<chem::MolGraph>& mols, const FeatureOptions& opts, int threads);

// Tasks that cannot be taught under the plan: fewer than k observations, or
// a training split with fewer than 2. Returns (task index, reason).
std::vector<std::pair<std::size_t, std::string>> degenerate_tasks(const SparseTargetMatrix& y, const CvPlan& plan);

struct TeacherSet {
    std::size_t seed_index = 0;
    // models[fold][task], one GBT per experimental task.
    std::vector<std::vector<gbt::GbtModel>> models;
    // fold_predictions[fold]: that fold's teachers evaluated on every row.
    std::vector<gt::Mat> fold_predictions;
};

// Teacher (fold f, task t) fits the observed labels of rows outside fold f,
// with GBT seed derive_seed(seed, {f, t}). With a cache directory, models
// whose key file matches are loaded instead of refitted, and fresh fits are
// written there.
TeacherSet train_teachers(const desc::FeatureMatrix& x, const SparseTargetMatrix& y, const CvPlan& plan,
                          std::size_t seed_index, const gbt::GbtParams& params, int threads,
                          LeakageAudit* audit = nullptr, const std::optional<std::filesystem::path>& cache_dir = {});

gt::Mat combine_teacher_predictions(const std::vector<gt::Mat>& fold_predictions, const std::vector<int>& fold_of,
                                    SyntheticMode mode);

// Appends one dense synthetic column per experimental task ("<name>_syn").
SparseTargetMatrix with_synthetic(const SparseTargetMatrix& y, const gt::Mat& synthetic);

struct SyntheticTargets {
    TeacherSet teachers;
    gt::Mat values;       // n x T_exp
    gt::MaskMat observed; // all ones
};

SyntheticTargets generate_synthetic_targets(const desc::FeatureMatrix& x, const SparseTargetMatrix& y,
                                            const CvPlan& plan, std::size_t seed_index,
                                            const gbt::GbtParams& params, SyntheticMode mode, int threads = 1,
                                            LeakageAudit* audit = nullptr,
                                            const std::optional<std::filesystem::path>& cache_dir = {});

// Early-stopping split of a training fold: rows are grouped by their
// experimental observation pattern and each group contributes its share of
// round(fraction * n), allocated by cumulative rounding.
std::vector<std::size_t> inner_validation_split(const gt::MaskMat& observed, std::size_t n_experimental,
                                                const std::vector<std::size_t>& train_rows, double fraction,
                                                std::uint64_t seed);

// GT config for one (seed, fold) run: n_tasks heads, init seed
// derive_seed(seed, {fold}). gt_naive and gt_sta share everything but n_tasks.
gt::GtConfig gt_config_for(const ExperimentConfig& cfg, std::uint64_t seed, int fold, int n_tasks);

struct GtFoldResult {
    std::vector<std::size_t> test_rows;
    gt::Mat test_predictions; // test rows x T_exp, original units
    gt::TrainingLog log;
    gt::GtModel model;
};

// Trains one GT on the training split of (seed, fold). `y` holds the
// experimental columns first, then any synthetic ones; the head width is
// y.n_tasks(). The early-stopping loss only counts experimental columns.
GtFoldResult run_gt_fold(const std::vector<gt::GraphSample>& graphs, const SparseTargetMatrix& y, const CvPlan& plan,
                         std::size_t seed_index, int fold, const ExperimentConfig& cfg, const std::string& stage,
                         LeakageAudit* audit = nullptr);

struct ModeOutcome {
    std::string name;
    // per seed: n x T_exp out-of-fold predictions
    std::vector<gt::Mat> predictions;
    std::vector<std::vector<report::TaskMetrics>> per_seed;
    report::MetricsReport report;
    // logs[seed][fold], GT modes only
    std::vector<std::vector<gt::TrainingLog>> logs;
};

struct ArtifactOptions {
    std::filesystem::path dir;
    bool checkpoints = true;
};

struct ExperimentResult {
    std::vector<ModeOutcome> modes;
    LeakageAudit audit;
    const ModeOutcome& find(const std::string& name) const;
};

// Runs the requested modes over every seed and fold of the plan. gt_sta runs
// once per configured synthetic mode. Metrics are computed per seed on the
// pooled out-of-fold predictions of observed entries, then averaged over
// seeds.
ExperimentResult run_experiment(const Dataset& data, const desc::FeatureMatrix& x, const CvPlan& plan,
                                const ExperimentConfig& cfg, const std::vector<Mode>& modes,
                                const std::optional<ArtifactOptions>& artifacts = {});

void write_predictions(const std::filesystem::path& path, const SparseTargetMatrix& y, const gt::Mat& pred,
                       const std::vector<int>& fold_of);

} // namespace staug::pipeline
