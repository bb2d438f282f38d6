#pragma once

#include "staug/chem/mol_graph.hpp"
#include "staug/common/csv.hpp"
#include "staug/gt/model.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace staug::pipeline {

enum class TaskKind { Experimental, Synthetic };

struct TaskSpec {
    std::string name;
    std::string unit;
    // Metal-containing molecules are admitted for this task only.
    bool allow_metals = false;
};

struct SparseTargetMatrix {
    std::vector<std::string> rows; // canonical SMILES keys
    std::vector<TaskSpec> tasks;
    std::vector<TaskKind> kinds;
    gt::Mat values;        // NaN where unobserved
    gt::MaskMat observed;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_tasks() const { return tasks.size(); }
    std::size_t n_experimental() const;
    std::vector<std::string> task_names() const;
    // Throws PreconditionError when a row has no experimental observation or
    // a synthetic column has a hole.
    void validate() const;
};

struct RowIssue {
    std::string source;
    std::size_t line = 0; // 1-based data row
    std::string smiles;
    std::string reason;
};

struct Dataset {
    SparseTargetMatrix targets;
    std::vector<chem::MolGraph> mols;
    std::vector<RowIssue> issues;

    std::string hash() const;
    // Keeps the given tasks (by index), then drops rows left without
    // observations.
    Dataset select_tasks(const std::vector<std::size_t>& keep) const;
};

struct NamedTable {
    std::string name;
    csv::Table table;
};

// Merges sources on canonical SMILES. With an empty task list every
// non-smiles column becomes a task. Duplicate (molecule, task) values are
// reduced to their median. Throws PreconditionError, NoUsableRows.
Dataset assemble_dataset(const std::vector<NamedTable>& sources, std::vector<TaskSpec> tasks = {});
Dataset assemble_dataset(const std::vector<std::filesystem::path>& sources, std::vector<TaskSpec> tasks = {});

double median(std::vector<double> v);

void write_issues(const std::filesystem::path& path, const std::vector<RowIssue>& issues);

} // namespace staug::pipeline
