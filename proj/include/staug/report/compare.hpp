#pragma once

#include "staug/report/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace staug::report {

enum class Metric { Mae, Rmse, R2Direct, OneMinusR2 };

const char* to_string(Metric m);
bool lower_is_better(Metric m);

struct ComparisonRow {
    std::string task;
    Metric metric = Metric::Mae;
    double ref_value = 0.0;
    double new_value = 0.0;
    double pct_change = 0.0; // NaN when ref is 0 or either side undefined
    bool better = false;
};

struct Comparison {
    std::string ref_mode;
    std::string new_mode;
    std::vector<ComparisonRow> rows;
    int improved = 0; // tasks whose mean RMSE improved
    int total = 0;

    std::string headline() const; // "improved K of N tasks"
};

// Percent change 100 (new - ref) / |ref|.
double pct_change(double ref, double now);

// Rows ordered by the reference report's task order, metrics in enum order.
// Throws TaskSetMismatch when the task sets differ.
Comparison compare_models(const MetricsReport& ref, const MetricsReport& now);

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& m);
MetricsReport read_metrics_csv(const std::filesystem::path& path, const std::string& mode);
void write_comparison_csv(const std::filesystem::path& path, const Comparison& c);
std::string comparison_svg(const Comparison& c);

// Writes metrics_<mode>.csv, compare_<ref>_vs_<new>.{csv,svg} and
// summary.txt. Inputs are validated before any file is created.
void emit_report(const std::vector<Comparison>& comparisons, const std::vector<MetricsReport>& metrics,
                 const std::filesystem::path& out_dir, const std::vector<std::string>& notes = {});

} // namespace staug::report
