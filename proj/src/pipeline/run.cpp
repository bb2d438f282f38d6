#include "staug/pipeline/run.hpp"

#include "staug/common/error.hpp"
#include "staug/common/hash.hpp"
#include "staug/common/numfmt.hpp"
#include "staug/common/parallel.hpp"
#include "staug/descriptors/descriptors.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace staug::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

#ifndef STAUG_VERSION
#define STAUG_VERSION "0.0.0"
#endif

std::string software_version() { return STAUG_VERSION; }

std::string manifest_to_json(const RunManifest& m)
{
    const auto& c = m.config;
    json j;
    j["version"] = m.version.empty() ? software_version() : m.version;
    j["sources"] = m.sources;
    j["tasks"] = json::array();
    for (const auto& t : m.tasks) {
        j["tasks"].push_back({{"name", t.name}, {"unit", t.unit}, {"allow_metals", t.allow_metals}});
    }
    j["modes"] = json::array();
    for (auto mode : m.modes) {
        j["modes"].push_back(to_string(mode));
    }
    j["cv"] = {{"seeds", c.seeds}, {"k", c.k}};
    j["synthetic"] = json::array();
    for (auto s : c.synthetic) {
        j["synthetic"].push_back(to_string(s));
    }
    j["val_fraction"] = c.val_fraction;
    j["threads"] = c.threads;
    j["features"] = {{"arcsinh_threshold", c.features.arcsinh_threshold},
                     {"var_eps", c.features.prune.var_eps},
                     {"corr_max", c.features.prune.corr_max},
                     {"min_overlap", c.features.prune.min_overlap}};
    j["gbt"] = {{"n_rounds", c.gbt.n_rounds},     {"max_depth", c.gbt.max_depth},
                {"learning_rate", c.gbt.learning_rate}, {"lambda", c.gbt.lambda},
                {"gamma", c.gbt.gamma},           {"min_child_weight", c.gbt.min_child_weight},
                {"subsample", c.gbt.subsample},   {"colsample", c.gbt.colsample}};
    j["gt"] = {{"layers", c.gt.layers},         {"heads", c.gt.heads},       {"hidden_dim", c.gt.hidden_dim},
               {"head_hidden", c.gt.head_hidden}, {"dropout", c.gt.dropout}, {"lr", c.gt.lr},
               {"beta1", c.gt.beta1},           {"beta2", c.gt.beta2},       {"eps", c.gt.eps},
               {"max_epochs", c.gt.max_epochs}, {"patience", c.gt.patience}, {"batch_size", c.gt.batch_size}};
    j["results"] = {{"dataset_hash", m.dataset_hash},   {"schema_id", m.schema_id},
                    {"n_rows", m.n_rows},               {"plan_hash", m.plan_hash},
                    {"feature_fingerprint", m.feature_fingerprint}, {"excluded_tasks", m.excluded_tasks}};
    return j.dump(2) + "\n";
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& out)
{
    if (j.contains(key) && !j.at(key).is_null()) {
        out = j.at(key).get<T>();
    }
}

} // namespace

RunManifest manifest_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    RunManifest m;
    try {
        auto& c = m.config;
        take(j, "version", m.version);
        take(j, "sources", m.sources);
        if (j.contains("tasks")) {
            for (const auto& t : j.at("tasks")) {
                TaskSpec spec;
                take(t, "name", spec.name);
                take(t, "unit", spec.unit);
                take(t, "allow_metals", spec.allow_metals);
                m.tasks.push_back(spec);
            }
        }
        if (j.contains("modes")) {
            m.modes.clear();
            for (const auto& s : j.at("modes")) {
                m.modes.push_back(mode_from_string(s.get<std::string>()));
            }
        }
        if (j.contains("cv")) {
            take(j.at("cv"), "seeds", c.seeds);
            take(j.at("cv"), "k", c.k);
        }
        if (j.contains("synthetic")) {
            c.synthetic.clear();
            for (const auto& s : j.at("synthetic")) {
                c.synthetic.push_back(synthetic_mode_from_string(s.get<std::string>()));
            }
        }
        take(j, "val_fraction", c.val_fraction);
        take(j, "threads", c.threads);
        if (j.contains("features")) {
            const auto& f = j.at("features");
            take(f, "arcsinh_threshold", c.features.arcsinh_threshold);
            take(f, "var_eps", c.features.prune.var_eps);
            take(f, "corr_max", c.features.prune.corr_max);
            take(f, "min_overlap", c.features.prune.min_overlap);
        }
        if (j.contains("gbt")) {
            const auto& g = j.at("gbt");
            take(g, "n_rounds", c.gbt.n_rounds);
            take(g, "max_depth", c.gbt.max_depth);
            take(g, "learning_rate", c.gbt.learning_rate);
            take(g, "lambda", c.gbt.lambda);
            take(g, "gamma", c.gbt.gamma);
            take(g, "min_child_weight", c.gbt.min_child_weight);
            take(g, "subsample", c.gbt.subsample);
            take(g, "colsample", c.gbt.colsample);
        }
        if (j.contains("gt")) {
            const auto& g = j.at("gt");
            take(g, "layers", c.gt.layers);
            take(g, "heads", c.gt.heads);
            take(g, "hidden_dim", c.gt.hidden_dim);
            take(g, "head_hidden", c.gt.head_hidden);
            take(g, "dropout", c.gt.dropout);
            take(g, "lr", c.gt.lr);
            take(g, "beta1", c.gt.beta1);
            take(g, "beta2", c.gt.beta2);
            take(g, "eps", c.gt.eps);
            take(g, "max_epochs", c.gt.max_epochs);
            take(g, "patience", c.gt.patience);
            take(g, "batch_size", c.gt.batch_size);
        }
        if (j.contains("results")) {
            const auto& r = j.at("results");
            take(r, "dataset_hash", m.dataset_hash);
            take(r, "schema_id", m.schema_id);
            take(r, "n_rows", m.n_rows);
            take(r, "plan_hash", m.plan_hash);
            take(r, "feature_fingerprint", m.feature_fingerprint);
            take(r, "excluded_tasks", m.excluded_tasks);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return m;
}

RunManifest load_manifest(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return manifest_from_json(ss.str());
}

std::vector<report::Comparison> standard_comparisons(const ExperimentResult& r)
{
    std::vector<report::Comparison> out;
    auto has = [&](const std::string& name) {
        return std::any_of(r.modes.begin(), r.modes.end(), [&](const ModeOutcome& m) { return m.name == name; });
    };
    if (has("xgb") && has("gt_naive")) {
        out.push_back(report::compare_models(r.find("xgb").report, r.find("gt_naive").report));
    }
    for (const auto& m : r.modes) {
        if (m.name.rfind("gt_sta", 0) != 0) {
            continue;
        }
        if (has("gt_naive")) {
            out.push_back(report::compare_models(r.find("gt_naive").report, m.report));
        }
        if (has("xgb")) {
            out.push_back(report::compare_models(r.find("xgb").report, m.report));
        }
    }
    return out;
}

void write_per_seed_metrics(const fs::path& path, const ModeOutcome& m, const CvPlan& plan)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    csv::write_row(out, {"seed", "target", "mae", "rmse", "r2", "n"});
    for (std::size_t s = 0; s < m.per_seed.size(); ++s) {
        for (const auto& t : m.per_seed[s]) {
            csv::write_row(out, {std::to_string(plan.seeds[s]), t.task, format_exact(t.mae), format_exact(t.rmse),
                                 format_exact(t.r2), std::to_string(t.n_points)});
        }
    }
}

RunAllResult run_all(const RunManifest& request, const fs::path& out, bool checkpoints)
{
    RunAllResult res;
    auto& m = res.manifest;
    m = request;
    m.version = software_version();
    m.config.validate();
    if (m.sources.empty()) {
        throw PreconditionError("no dataset sources given");
    }
    std::vector<fs::path> sources;
    for (const auto& s : m.sources) {
        sources.emplace_back(s);
    }
    auto data = assemble_dataset(sources, m.tasks);

    // Tasks the plan cannot teach are dropped before anything is trained.
    auto plan = make_cv_plan(data.targets.n_rows(), m.config.seeds, m.config.k);
    const auto bad = degenerate_tasks(data.targets, plan);
    m.excluded_tasks.clear();
    if (!bad.empty()) {
        std::vector<std::size_t> keep;
        for (std::size_t c = 0; c < data.targets.n_tasks(); ++c) {
            const bool drop = std::any_of(bad.begin(), bad.end(), [&](const auto& b) { return b.first == c; });
            if (!drop) {
                keep.push_back(c);
            }
        }
        for (const auto& [c, why] : bad) {
            m.excluded_tasks.push_back(data.targets.tasks[c].name + ": " + why);
            std::cerr << "DegenerateTask: " << data.targets.tasks[c].name << " excluded (" << why << ")\n";
        }
        if (keep.empty()) {
            throw DegenerateTask("every task is degenerate under the CV plan");
        }
        data = data.select_tasks(keep);
        plan = make_cv_plan(data.targets.n_rows(), m.config.seeds, m.config.k);
    }

    if (!request.dataset_hash.empty() && request.dataset_hash != data.hash()) {
        throw PreconditionError("dataset hash " + data.hash() + " differs from the manifest's " + request.dataset_hash);
    }
    m.dataset_hash = data.hash();
    m.n_rows = data.targets.n_rows();
    m.plan_hash = plan.hash();

    const int threads = resolve_threads(m.config.threads);
    const auto x = prepare_features(data.mols, m.config.features, threads);
    m.schema_id = x.schema_id;
    m.feature_fingerprint = to_hex(x.fingerprint());

    fs::create_directories(out);
    auto exp = run_experiment(data, x, plan, m.config, m.modes, ArtifactOptions{out, checkpoints});

    const auto leaks = exp.audit.violations(plan);
    if (!leaks.empty()) {
        throw PreconditionError("held-out labels reached training: " + leaks.front());
    }

    std::vector<report::MetricsReport> reports;
    for (const auto& mode : exp.modes) {
        reports.push_back(mode.report);
    }
    auto comparisons = standard_comparisons(exp);
    std::vector<std::string> notes;
    notes.push_back("dataset " + m.dataset_hash + ": " + std::to_string(m.n_rows) + " molecules, " +
                    std::to_string(data.targets.n_tasks()) + " tasks");
    for (const auto& e : m.excluded_tasks) {
        notes.push_back("excluded " + e);
    }
    notes.push_back("leakage audit: " + std::to_string(exp.audit.entries().size()) + " label reads, 0 from held-out folds");
    report::emit_report(comparisons, reports, out, notes);
    for (const auto& mode : exp.modes) {
        write_per_seed_metrics(out / ("metrics_" + mode.name + "_per_seed.csv"), mode, plan);
    }
    write_issues(out / "issues.csv", data.issues);
    std::ofstream(out / "manifest.json", std::ios::binary) << manifest_to_json(m);

    res.dataset = std::move(data);
    res.plan = std::move(plan);
    res.experiment = std::move(exp);
    res.comparisons = std::move(comparisons);
    return res;
}

} // namespace staug::pipeline
