#include "staug/report/metrics.hpp"

#include "staug/common/error.hpp"

#include <cmath>
#include <limits>

namespace staug::report {

TaskMetrics compute_metrics(std::span<const double> pred, std::span<const double> truth, std::string task)
{
    if (pred.size() != truth.size()) {
        throw DimensionMismatch("prediction and truth lengths differ");
    }
    if (pred.size() < 2) {
        throw TooFewRows("metrics need at least 2 pairs");
    }
    const auto n = static_cast<double>(pred.size());
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        abs_sum += std::fabs(e);
        sq_sum += e * e;
        mean += truth[i];
    }
    mean /= n;
    double ss_tot = 0.0;
    for (double t : truth) {
        ss_tot += (t - mean) * (t - mean);
    }
    TaskMetrics m;
    m.task = std::move(task);
    m.n_points = pred.size();
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - sq_sum / ss_tot;
    } else {
        m.r2 = std::numeric_limits<double>::quiet_NaN();
        m.constant_truth = true;
    }
    return m;
}

double variance_explained_view(double r2) { return 1.0 - r2; }

const TaskSummary* MetricsReport::find(const std::string& task) const
{
    for (const auto& t : tasks) {
        if (t.task == task) {
            return &t;
        }
    }
    return nullptr;
}

double sample_std(std::span<const double> v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

double mean_of(const std::vector<double>& v)
{
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

} // namespace

MetricsReport aggregate_over_seeds(const std::string& mode, const std::vector<std::vector<TaskMetrics>>& per_seed)
{
    if (per_seed.empty()) {
        throw PreconditionError("no per-seed metrics to aggregate");
    }
    MetricsReport r;
    r.mode = mode;
    const auto n_tasks = per_seed.front().size();
    for (std::size_t t = 0; t < n_tasks; ++t) {
        std::vector<double> mae, rmse, r2;
        TaskSummary s;
        s.task = per_seed.front()[t].task;
        for (const auto& seed : per_seed) {
            if (seed.size() != n_tasks || seed[t].task != s.task) {
                throw TaskSetMismatch("seeds disagree on the task list");
            }
            mae.push_back(seed[t].mae);
            rmse.push_back(seed[t].rmse);
            if (std::isnan(seed[t].r2)) {
                ++s.r2_omitted;
            } else {
                r2.push_back(seed[t].r2);
            }
        }
        s.n_seeds = static_cast<int>(per_seed.size());
        s.mae_mean = mean_of(mae);
        s.mae_std = sample_std(mae);
        s.rmse_mean = mean_of(rmse);
        s.rmse_std = sample_std(rmse);
        s.r2_mean = mean_of(r2);
        s.r2_std = r2.empty() ? std::numeric_limits<double>::quiet_NaN() : sample_std(r2);
        r.tasks.push_back(s);
    }
    return r;
}

} // namespace staug::report
