#pragma once

#include <span>
#include <string>
#include <vector>

namespace staug::report {

struct TaskMetrics {
    std::string task;
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0; // NaN when the truth is constant
    std::size_t n_points = 0;
    bool constant_truth = false;
};

// Throws TooFewRows for fewer than 2 pairs. A constant truth vector yields
// r2 = NaN with constant_truth set; mae and rmse are still reported.
TaskMetrics compute_metrics(std::span<const double> pred, std::span<const double> truth, std::string task = {});

// 1 - r2, the variance-explained view.
double variance_explained_view(double r2);

struct TaskSummary {
    std::string task;
    double mae_mean = 0.0, mae_std = 0.0;
    double rmse_mean = 0.0, rmse_std = 0.0;
    double r2_mean = 0.0, r2_std = 0.0;
    int n_seeds = 0;
    int r2_omitted = 0; // seeds whose r2 was undefined
};

struct MetricsReport {
    std::string mode;
    std::vector<TaskSummary> tasks;

    const TaskSummary* find(const std::string& task) const;
};

// per_seed[s][t] holds the metrics of task t under seed s. Std is the
// sample standard deviation (n - 1 denominator); 0 for a single seed.
MetricsReport aggregate_over_seeds(const std::string& mode, const std::vector<std::vector<TaskMetrics>>& per_seed);

double sample_std(std::span<const double> v);

} // namespace staug::report
