#include "staug/pipeline/dataset.hpp"

#include "staug/chem/filters.hpp"
#include "staug/chem/smiles.hpp"
#include "staug/common/error.hpp"
#include "staug/common/hash.hpp"
#include "staug/common/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

namespace staug::pipeline {

std::size_t SparseTargetMatrix::n_experimental() const
{
    return static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), TaskKind::Experimental));
}

std::vector<std::string> SparseTargetMatrix::task_names() const
{
    std::vector<std::string> out;
    for (const auto& t : tasks) {
        out.push_back(t.name);
    }
    return out;
}

void SparseTargetMatrix::validate() const
{
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto t = static_cast<Eigen::Index>(tasks.size());
    if (values.rows() != n || values.cols() != t || observed.rows() != n || observed.cols() != t ||
        kinds.size() != tasks.size()) {
        throw DimensionMismatch("target matrix shape does not match its labels");
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        bool any = false;
        for (Eigen::Index c = 0; c < t; ++c) {
            const bool synth = kinds[static_cast<std::size_t>(c)] == TaskKind::Synthetic;
            if (synth && !observed(r, c)) {
                throw PreconditionError("synthetic column '" + tasks[static_cast<std::size_t>(c)].name +
                                        "' has an unobserved entry");
            }
            any = any || (!synth && observed(r, c));
        }
        if (!any) {
            throw PreconditionError("row '" + rows[static_cast<std::size_t>(r)] + "' has no experimental target");
        }
    }
}

std::string Dataset::hash() const
{
    Fnv1a h;
    h.update_u64(targets.n_rows());
    h.update_u64(targets.n_tasks());
    for (const auto& t : targets.tasks) {
        h.update(t.name);
        h.update_u64(t.allow_metals ? 1 : 0);
    }
    for (std::size_t r = 0; r < targets.n_rows(); ++r) {
        h.update(targets.rows[r]);
        for (std::size_t c = 0; c < targets.n_tasks(); ++c) {
            const auto i = static_cast<Eigen::Index>(r);
            const auto j = static_cast<Eigen::Index>(c);
            h.update_u64(targets.observed(i, j));
            h.update_double(targets.observed(i, j) ? targets.values(i, j) : 0.0);
        }
    }
    return h.hex();
}

Dataset Dataset::select_tasks(const std::vector<std::size_t>& keep) const
{
    Dataset out;
    out.issues = issues;
    for (auto c : keep) {
        out.targets.tasks.push_back(targets.tasks.at(c));
        out.targets.kinds.push_back(targets.kinds.at(c));
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < targets.n_rows(); ++r) {
        bool any = false;
        for (auto c : keep) {
            any = any || targets.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
        if (any) {
            rows.push_back(r);
        }
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto t = static_cast<Eigen::Index>(keep.size());
    out.targets.values.resize(n, t);
    out.targets.observed.resize(n, t);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = rows[static_cast<std::size_t>(i)];
        out.targets.rows.push_back(targets.rows[r]);
        out.mols.push_back(mols[r]);
        for (Eigen::Index j = 0; j < t; ++j) {
            const auto c = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]);
            out.targets.values(i, j) = targets.values(static_cast<Eigen::Index>(r), c);
            out.targets.observed(i, j) = targets.observed(static_cast<Eigen::Index>(r), c);
        }
    }
    if (rows.empty()) {
        throw NoUsableRows("no rows remain after task selection");
    }
    return out;
}

double median(std::vector<double> v)
{
    if (v.empty()) {
        return NAN;
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Dataset assemble_dataset(const std::vector<NamedTable>& sources, std::vector<TaskSpec> tasks)
{
    if (sources.empty()) {
        throw PreconditionError("no dataset sources");
    }
    if (tasks.empty()) {
        for (const auto& src : sources) {
            for (const auto& col : src.table.header) {
                const bool known = std::any_of(tasks.begin(), tasks.end(), [&](const TaskSpec& t) { return t.name == col; });
                if (col != "smiles" && !known) {
                    tasks.push_back({col, "", false});
                }
            }
        }
    }
    std::map<std::string, std::size_t> task_index;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!task_index.emplace(tasks[i].name, i).second) {
            throw PreconditionError("duplicate task '" + tasks[i].name + "'");
        }
    }

    Dataset out;
    std::unordered_map<std::string, std::size_t> row_of;
    std::vector<std::string> keys;
    std::vector<chem::MolGraph> mols;
    std::vector<std::vector<std::vector<double>>> cells; // row -> task -> values

    for (const auto& src : sources) {
        const int smiles_col = src.table.column("smiles");
        if (smiles_col < 0) {
            throw PreconditionError(src.name + ": no 'smiles' column");
        }
        std::vector<std::pair<int, std::size_t>> cols; // csv column -> task
        for (std::size_t c = 0; c < src.table.header.size(); ++c) {
            auto it = task_index.find(src.table.header[c]);
            if (it != task_index.end()) {
                cols.emplace_back(static_cast<int>(c), it->second);
            }
        }
        if (cols.empty()) {
            throw PreconditionError(src.name + ": no declared target column");
        }
        for (std::size_t line = 0; line < src.table.rows.size(); ++line) {
            const auto& row = src.table.rows[line];
            const std::string smiles = static_cast<std::size_t>(smiles_col) < row.size() ? row[static_cast<std::size_t>(smiles_col)] : "";
            auto issue = [&](std::string reason) { out.issues.push_back({src.name, line + 1, smiles, std::move(reason)}); };
            chem::MolGraph g;
            std::string key;
            try {
                g = chem::read_smiles(smiles);
                key = chem::canonical_smiles(g);
            } catch (const Error& e) {
                issue(std::string("ParseFailure: ") + e.what());
                continue;
            }
            const auto organic = chem::admit_reason(g, false);
            const auto any_metal = chem::admit_reason(g, true);
            std::vector<std::pair<std::size_t, double>> accepted;
            bool filtered = false;
            for (auto [c, t] : cols) {
                const std::string cell = static_cast<std::size_t>(c) < row.size() ? row[static_cast<std::size_t>(c)] : "";
                double v;
                try {
                    v = parse_cell(cell);
                } catch (const Error& e) {
                    issue(std::string("bad value for ") + tasks[t].name + ": " + e.what());
                    continue;
                }
                if (std::isnan(v)) {
                    continue;
                }
                const auto reason = tasks[t].allow_metals ? any_metal : organic;
                if (reason != chem::AdmitReason::Admitted) {
                    filtered = true;
                    continue;
                }
                accepted.emplace_back(t, v);
            }
            if (filtered) {
                const auto reason = any_metal != chem::AdmitReason::Admitted ? any_metal : organic;
                issue(std::string("filtered: ") + chem::to_string(reason) +
                      (accepted.empty() ? "" : " (kept for metal-tolerant tasks)"));
            }
            if (accepted.empty()) {
                continue;
            }
            auto [it, inserted] = row_of.emplace(key, keys.size());
            if (inserted) {
                keys.push_back(key);
                mols.push_back(std::move(g));
                cells.emplace_back(tasks.size());
            }
            for (auto [t, v] : accepted) {
                cells[it->second][t].push_back(v);
            }
        }
    }
    if (keys.empty()) {
        throw NoUsableRows("no row has an admissible observation");
    }

    auto& tm = out.targets;
    tm.rows = std::move(keys);
    tm.tasks = tasks;
    tm.kinds.assign(tasks.size(), TaskKind::Experimental);
    const auto n = static_cast<Eigen::Index>(tm.rows.size());
    const auto t = static_cast<Eigen::Index>(tasks.size());
    tm.values = gt::Mat::Constant(n, t, NAN);
    tm.observed = gt::MaskMat::Zero(n, t);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < t; ++c) {
            const auto& vs = cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (!vs.empty()) {
                tm.values(r, c) = median(vs);
                tm.observed(r, c) = 1;
            }
        }
    }
    out.mols = std::move(mols);
    return out;
}

Dataset assemble_dataset(const std::vector<std::filesystem::path>& sources, std::vector<TaskSpec> tasks)
{
    std::vector<NamedTable> tables;
    for (const auto& p : sources) {
        tables.push_back({p.filename().string(), csv::read(p)});
    }
    return assemble_dataset(tables, std::move(tasks));
}

void write_issues(const std::filesystem::path& path, const std::vector<RowIssue>& issues)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    csv::write_row(out, {"source", "row", "smiles", "reason"});
    for (const auto& i : issues) {
        csv::write_row(out, {i.source, std::to_string(i.line), i.smiles, i.reason});
    }
}

} // namespace staug::pipeline
