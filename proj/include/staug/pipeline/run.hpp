#pragma once

#include "staug/pipeline/experiment.hpp"
#include "staug/report/compare.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace staug::pipeline {

std::string software_version();

// Everything needed to rerun an experiment: inputs, every parameter, and
// the fingerprints of what was computed from them.
struct RunManifest {
    std::string version;
    std::vector<std::string> sources;
    std::vector<TaskSpec> tasks; // empty = every non-smiles column
    std::vector<Mode> modes{Mode::Xgb, Mode::GtNaive, Mode::GtSta};
    ExperimentConfig config;

    // Filled in by run_all; checked on replay when non-empty.
    std::string dataset_hash;
    std::string schema_id;
    std::size_t n_rows = 0;
    std::string plan_hash;
    std::string feature_fingerprint;
    std::vector<std::string> excluded_tasks;
};

std::string manifest_to_json(const RunManifest& m);
// Missing keys keep their defaults, so a hand-written config file with only
// a few fields is accepted.
RunManifest manifest_from_json(const std::string& text);
RunManifest load_manifest(const std::filesystem::path& path);

struct RunAllResult {
    RunManifest manifest;
    Dataset dataset;
    CvPlan plan;
    ExperimentResult experiment;
    std::vector<report::Comparison> comparisons;
};

// Reference/new pairs reported for the modes present: xgb vs gt_naive, and
// for every gt_sta variant, gt_naive vs it and xgb vs it.
std::vector<report::Comparison> standard_comparisons(const ExperimentResult& r);

// Assemble, plan, featurize, run every mode, then write metrics, comparisons,
// predictions, teachers, checkpoints and manifest.json under `out`. Nothing
// is reported if any stage fails.
RunAllResult run_all(const RunManifest& request, const std::filesystem::path& out, bool checkpoints = true);

void write_per_seed_metrics(const std::filesystem::path& path, const ModeOutcome& m, const CvPlan& plan);

} // namespace staug::pipeline
