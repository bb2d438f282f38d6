#include "staug/report/compare.hpp"

#include "staug/common/csv.hpp"
#include "staug/common/error.hpp"
#include "staug/common/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace staug::report {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr Metric kMetrics[] = {Metric::Mae, Metric::Rmse, Metric::R2Direct, Metric::OneMinusR2};

double metric_value(const TaskSummary& s, Metric m)
{
    switch (m) {
    case Metric::Mae: return s.mae_mean;
    case Metric::Rmse: return s.rmse_mean;
    case Metric::R2Direct: return s.r2_mean;
    case Metric::OneMinusR2: return variance_explained_view(s.r2_mean);
    }
    return kNaN;
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void open_or_throw(std::ofstream& out, const std::filesystem::path& path)
{
    out.open(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

} // namespace

const char* to_string(Metric m)
{
    switch (m) {
    case Metric::Mae: return "mae";
    case Metric::Rmse: return "rmse";
    case Metric::R2Direct: return "r2_direct";
    case Metric::OneMinusR2: return "one_minus_r2";
    }
    return "?";
}

bool lower_is_better(Metric m) { return m != Metric::R2Direct; }

double pct_change(double ref, double now)
{
    if (ref == 0.0 || std::isnan(ref) || std::isnan(now)) {
        return kNaN;
    }
    return 100.0 * (now - ref) / std::fabs(ref);
}

std::string Comparison::headline() const
{
    return "improved " + std::to_string(improved) + " of " + std::to_string(total) + " tasks";
}

Comparison compare_models(const MetricsReport& ref, const MetricsReport& now)
{
    std::set<std::string> a, b;
    for (const auto& t : ref.tasks) {
        a.insert(t.task);
    }
    for (const auto& t : now.tasks) {
        b.insert(t.task);
    }
    if (a != b || a.size() != ref.tasks.size() || b.size() != now.tasks.size()) {
        throw TaskSetMismatch("reports '" + ref.mode + "' and '" + now.mode + "' cover different tasks");
    }
    Comparison c;
    c.ref_mode = ref.mode;
    c.new_mode = now.mode;
    for (const auto& rt : ref.tasks) {
        const auto& nt = *now.find(rt.task);
        for (Metric m : kMetrics) {
            ComparisonRow row;
            row.task = rt.task;
            row.metric = m;
            row.ref_value = metric_value(rt, m);
            row.new_value = metric_value(nt, m);
            row.pct_change = pct_change(row.ref_value, row.new_value);
            row.better = lower_is_better(m) ? row.new_value < row.ref_value : row.new_value > row.ref_value;
            if (m == Metric::Rmse && row.better) {
                ++c.improved;
            }
            c.rows.push_back(row);
        }
        ++c.total;
    }
    return c;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& m)
{
    std::ofstream out;
    open_or_throw(out, path);
    csv::write_row(out, {"target", "mae_mean", "mae_std", "rmse_mean", "rmse_std", "r2_mean", "r2_std"});
    for (const auto& t : m.tasks) {
        csv::write_row(out, {t.task, format_sig(t.mae_mean), format_sig(t.mae_std), format_sig(t.rmse_mean),
                             format_sig(t.rmse_std), format_sig(t.r2_mean), format_sig(t.r2_std)});
    }
}

MetricsReport read_metrics_csv(const std::filesystem::path& path, const std::string& mode)
{
    const auto table = csv::read(path);
    const std::vector<std::string> expected{"target", "mae_mean", "mae_std", "rmse_mean", "rmse_std", "r2_mean", "r2_std"};
    if (table.header != expected) {
        throw FormatError("unexpected metrics header in " + path.string());
    }
    MetricsReport m;
    m.mode = mode;
    for (const auto& row : table.rows) {
        TaskSummary s;
        s.task = row[0];
        s.mae_mean = parse_cell(row[1]);
        s.mae_std = parse_cell(row[2]);
        s.rmse_mean = parse_cell(row[3]);
        s.rmse_std = parse_cell(row[4]);
        s.r2_mean = parse_cell(row[5]);
        s.r2_std = parse_cell(row[6]);
        m.tasks.push_back(s);
    }
    return m;
}

void write_comparison_csv(const std::filesystem::path& path, const Comparison& c)
{
    std::ofstream out;
    open_or_throw(out, path);
    csv::write_row(out, {"target", "metric", "ref_value", "new_value", "pct_change", "better"});
    for (const auto& r : c.rows) {
        csv::write_row(out, {r.task, to_string(r.metric), format_sig(r.ref_value), format_sig(r.new_value),
                             format_sig(r.pct_change), r.better ? "true" : "false"});
    }
}

std::string comparison_svg(const Comparison& c)
{
    // bar height scale: clip at 3x the median magnitude when a few bars dwarf the rest
    std::vector<double> mags;
    for (const auto& r : c.rows) {
        if (!std::isnan(r.pct_change)) {
            mags.push_back(std::fabs(r.pct_change));
        }
    }
    std::sort(mags.begin(), mags.end());
    double cap = mags.empty() ? 1.0 : mags.back();
    if (!mags.empty()) {
        const double median = mags[mags.size() / 2];
        if (median > 0.0 && cap > 3.0 * median) {
            cap = 3.0 * median;
        }
    }
    if (!(cap > 0.0)) {
        cap = 1.0;
    }

    const int n_metrics = 4;
    const double bar_w = 14, group_gap = 18, left = 60, top = 50, plot_h = 300;
    const auto n_groups = static_cast<double>(c.total);
    const double width = left + n_groups * (n_metrics * bar_w + group_gap) + 160;
    const double height = top + plot_h + 90;
    const double zero_y = top + plot_h / 2;
    const double scale = (plot_h / 2) / cap;
    const double opacity[] = {1.0, 0.8, 0.6, 0.4};

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<title>" << xml_escape(c.new_mode + " vs " + c.ref_mode) << " (% change)</title>\n";
    s << "<text x=\"" << num(left) << "\" y=\"20\" font-size=\"14\">" << xml_escape(c.new_mode) << " vs "
      << xml_escape(c.ref_mode) << ", % change (" << xml_escape(c.headline()) << ")</text>\n";
    // axis labels
    for (double frac : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const double y = zero_y - frac * plot_h / 2;
        s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
          << num(frac * cap) << "</text>\n";
    }
    int group = 0;
    std::string current;
    int metric_index = 0;
    for (const auto& r : c.rows) {
        if (r.task != current) {
            if (!current.empty()) {
                ++group;
            }
            current = r.task;
            metric_index = 0;
            const double gx = left + group * (n_metrics * bar_w + group_gap);
            s << "<text x=\"" << num(gx + n_metrics * bar_w / 2) << "\" y=\"" << num(top + plot_h + 16)
              << "\" text-anchor=\"middle\">" << xml_escape(r.task) << "</text>\n";
        }
        const double x = left + group * (n_metrics * bar_w + group_gap) + metric_index * bar_w;
        const bool undefined = std::isnan(r.pct_change);
        const double v = undefined ? 0.0 : r.pct_change;
        const bool clipped = std::fabs(v) > cap;
        const double shown = std::clamp(v, -cap, cap);
        const double h = std::fabs(shown) * scale;
        const double y = shown >= 0 ? zero_y - h : zero_y;
        const char* fill = undefined ? "#9e9e9e" : (r.better ? "#2e7d32" : "#c62828");
        s << "<rect class=\"bar\" data-task=\"" << xml_escape(r.task) << "\" data-metric=\"" << to_string(r.metric)
          << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar_w - 2) << "\" height=\"" << num(h)
          << "\" fill=\"" << fill << "\" fill-opacity=\"" << opacity[metric_index] << "\"><title>"
          << xml_escape(r.task) << " " << to_string(r.metric) << ": "
          << (undefined ? std::string("undefined") : format_sig(r.pct_change, 4) + "%") << "</title></rect>\n";
        if (clipped) {
            const double my = v > 0 ? y - 4 : y + h + 10;
            s << "<text class=\"clipped\" x=\"" << num(x + (bar_w - 2) / 2) << "\" y=\"" << num(my)
              << "\" text-anchor=\"middle\" font-size=\"9\">" << format_sig(v, 3) << "</text>\n";
        }
        ++metric_index;
    }
    s << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(zero_y) << "\" x2=\""
      << num(left + n_groups * (n_metrics * bar_w + group_gap)) << "\" y2=\"" << num(zero_y)
      << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
    const double lx = left + n_groups * (n_metrics * bar_w + group_gap) + 10;
    for (int m = 0; m < n_metrics; ++m) {
        const double ly = top + 14.0 * m;
        s << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\"#555555\" fill-opacity=\""
          << opacity[m] << "\"/><text x=\"" << num(lx + 14) << "\" y=\"" << num(ly + 9) << "\">"
          << to_string(kMetrics[m]) << "</text>\n";
    }
    s << "<text x=\"" << num(lx) << "\" y=\"" << num(top + 70) << "\" fill=\"#2e7d32\">improved</text>\n";
    s << "<text x=\"" << num(lx) << "\" y=\"" << num(top + 84) << "\" fill=\"#c62828\">not improved</text>\n";
    s << "</svg>\n";
    return s.str();
}

void emit_report(const std::vector<Comparison>& comparisons, const std::vector<MetricsReport>& metrics,
                 const std::filesystem::path& out_dir, const std::vector<std::string>& notes)
{
    if (comparisons.empty() || metrics.empty()) {
        throw PreconditionError("report needs at least one comparison and one metrics table");
    }
    for (const auto& c : comparisons) {
        if (c.rows.empty()) {
            throw PreconditionError("empty comparison " + c.ref_mode + " vs " + c.new_mode);
        }
    }
    std::filesystem::create_directories(out_dir);
    for (const auto& m : metrics) {
        write_metrics_csv(out_dir / ("metrics_" + m.mode + ".csv"), m);
    }
    std::ofstream summary;
    open_or_throw(summary, out_dir / "summary.txt");
    for (const auto& c : comparisons) {
        const std::string stem = "compare_" + c.ref_mode + "_vs_" + c.new_mode;
        write_comparison_csv(out_dir / (stem + ".csv"), c);
        std::ofstream svg;
        open_or_throw(svg, out_dir / (stem + ".svg"));
        svg << comparison_svg(c);
        summary << c.new_mode << " vs " << c.ref_mode << ": " << c.headline() << " (rmse)\n";
    }
    for (const auto& m : metrics) {
        for (const auto& t : m.tasks) {
            if (t.r2_omitted > 0) {
                summary << "note: " << m.mode << "/" << t.task << " r2 undefined for " << t.r2_omitted << " of "
                        << t.n_seeds << " seeds (constant truth), omitted from its mean\n";
            }
        }
    }
    for (const auto& n : notes) {
        summary << n << '\n';
    }
}

} // namespace staug::report
