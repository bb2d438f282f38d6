// Command-line driver for the descriptor, teacher and graph-transformer
// pipeline. Run `staug <subcommand> --help` for options.

#include "staug/common/error.hpp"
#include "staug/common/hash.hpp"
#include "staug/common/numfmt.hpp"
#include "staug/common/parallel.hpp"
#include "staug/pipeline/benchmark.hpp"
#include "staug/pipeline/run.hpp"
#include "staug/report/compare.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace staug;
using namespace staug::pipeline;

namespace {

struct Globals {
    std::string config;
    int threads = 0;
    std::string out = "staug_out";
    std::string seed_list;
    bool oof_synthetic = false;
    std::string synthetic;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
    std::vector<std::uint64_t> out;
    for (const auto& part : CLI::detail::split(text, ',')) {
        if (!part.empty()) {
            out.push_back(std::stoull(part));
        }
    }
    if (out.empty()) {
        throw PreconditionError("empty --seed-list");
    }
    return out;
}

RunManifest build_request(const Globals& g, const std::vector<std::string>& sources)
{
    RunManifest m = g.config.empty() ? RunManifest{} : load_manifest(g.config);
    if (!sources.empty()) {
        m.sources.clear();
        for (const auto& s : sources) {
            m.sources.push_back(fs::absolute(s).string());
        }
        m.dataset_hash.clear(); // new inputs, nothing to check against
    }
    if (!g.seed_list.empty()) {
        m.config.seeds = parse_seeds(g.seed_list);
    }
    if (!g.synthetic.empty()) {
        m.config.synthetic.clear();
        for (const auto& s : CLI::detail::split(g.synthetic, ',')) {
            m.config.synthetic.push_back(synthetic_mode_from_string(s));
        }
    }
    if (g.oof_synthetic) {
        m.config.synthetic = {SyntheticMode::OutOfFold};
    }
    if (g.threads > 0) {
        m.config.threads = g.threads;
    } else if (m.config.threads <= 0 || g.config.empty()) {
        m.config.threads = resolve_threads(0);
    }
    return m;
}

Dataset load_dataset(const RunManifest& m)
{
    std::vector<fs::path> paths(m.sources.begin(), m.sources.end());
    auto data = assemble_dataset(paths, m.tasks);
    for (const auto& i : data.issues) {
        std::cerr << i.source << ":" << i.line << " " << i.smiles << ": " << i.reason << "\n";
    }
    return data;
}

int cmd_featurize(const Globals& g, const std::vector<std::string>& sources)
{
    const auto m = build_request(g, sources);
    const auto data = load_dataset(m);
    const auto x = prepare_features(data.mols, m.config.features, m.config.threads);
    fs::create_directories(g.out);
    desc::write_feature_csv(fs::path(g.out) / "features.csv", x);
    std::ofstream rows(fs::path(g.out) / "rows.csv", std::ios::binary);
    csv::write_row(rows, {"smiles"});
    for (const auto& k : data.targets.rows) {
        csv::write_row(rows, {k});
    }
    std::cout << x.rows << " molecules, " << x.cols << " descriptors kept (schema " << x.schema_id << ")\n";
    return 0;
}

int cmd_gen_benchmark(const Globals& g, const BenchmarkOptions& opts)
{
    const auto b = generate_benchmark(opts);
    write_benchmark(b, g.out);
    std::cout << "wrote " << b.smiles.size() << " molecules x " << b.tasks.size() << " tasks to " << g.out << "\n";
    return 0;
}

struct Prepared {
    RunManifest manifest;
    Dataset data;
    CvPlan plan;
    desc::FeatureMatrix x;
};

Prepared prepare(const Globals& g, const std::vector<std::string>& sources)
{
    Prepared p;
    p.manifest = build_request(g, sources);
    p.data = load_dataset(p.manifest);
    p.plan = make_cv_plan(p.data.targets.n_rows(), p.manifest.config.seeds, p.manifest.config.k);
    const auto bad = degenerate_tasks(p.data.targets, p.plan);
    if (!bad.empty()) {
        std::vector<std::size_t> keep;
        for (std::size_t c = 0; c < p.data.targets.n_tasks(); ++c) {
            if (std::none_of(bad.begin(), bad.end(), [&](const auto& b) { return b.first == c; })) {
                keep.push_back(c);
            }
        }
        for (const auto& [c, why] : bad) {
            std::cerr << "DegenerateTask: " << p.data.targets.tasks[c].name << " excluded (" << why << ")\n";
        }
        if (keep.empty()) {
            throw DegenerateTask("every task is degenerate under the CV plan");
        }
        p.data = p.data.select_tasks(keep);
        p.plan = make_cv_plan(p.data.targets.n_rows(), p.manifest.config.seeds, p.manifest.config.k);
    }
    p.x = prepare_features(p.data.mols, p.manifest.config.features, p.manifest.config.threads);
    return p;
}

int cmd_teach(const Globals& g, const std::vector<std::string>& sources)
{
    auto p = prepare(g, sources);
    const fs::path out(g.out);
    fs::create_directories(out);
    const auto& cfg = p.manifest.config;
    for (std::size_t s = 0; s < p.plan.seeds.size(); ++s) {
        auto teachers = train_teachers(p.x, p.data.targets, p.plan, s, cfg.gbt, cfg.threads, nullptr, out / "teachers");
        for (auto mode : cfg.synthetic) {
            const auto synth = combine_teacher_predictions(teachers.fold_predictions, p.plan.assignment[s], mode);
            const auto aug = with_synthetic(p.data.targets, synth);
            aug.validate();
            SparseTargetMatrix view = aug;
            view.tasks.erase(view.tasks.begin(), view.tasks.begin() + static_cast<long>(p.data.targets.n_tasks()));
            const auto name = std::string("synthetic_") + to_string(mode) + "_seed" + std::to_string(p.plan.seeds[s]) + ".csv";
            write_predictions(out / name, view, synth, p.plan.assignment[s]);
        }
    }
    std::ofstream(out / "manifest.json", std::ios::binary) << manifest_to_json(p.manifest);
    std::cout << "teachers for " << p.plan.seeds.size() << " seeds x " << p.plan.k << " folds x "
              << p.data.targets.n_tasks() << " tasks written to " << (out / "teachers") << "\n";
    return 0;
}

int cmd_train(const Globals& g, const std::vector<std::string>& sources, const std::string& mode_name, bool checkpoints)
{
    auto p = prepare(g, sources);
    const auto mode = mode_from_string(mode_name);
    p.manifest.modes = {mode};
    p.manifest.dataset_hash = p.data.hash();
    p.manifest.n_rows = p.data.targets.n_rows();
    p.manifest.plan_hash = p.plan.hash();
    p.manifest.schema_id = p.x.schema_id;
    p.manifest.feature_fingerprint = to_hex(p.x.fingerprint());
    const fs::path out(g.out);
    fs::create_directories(out);
    const auto r = run_experiment(p.data, p.x, p.plan, p.manifest.config, {mode}, ArtifactOptions{out, checkpoints});
    for (const auto& m : r.modes) {
        report::write_metrics_csv(out / ("metrics_" + m.name + ".csv"), m.report);
        write_per_seed_metrics(out / ("metrics_" + m.name + "_per_seed.csv"), m, p.plan);
        std::cout << m.name << ":\n";
        for (const auto& t : m.report.tasks) {
            std::cout << "  " << t.task << " rmse " << format_sig(t.rmse_mean) << " +- " << format_sig(t.rmse_std)
                      << " r2 " << format_sig(t.r2_mean) << "\n";
        }
    }
    std::ofstream(out / ("manifest_" + std::string(to_string(mode)) + ".json"), std::ios::binary)
        << manifest_to_json(p.manifest);
    return 0;
}

// Reads prediction CSVs (smiles, fold, one column per task) and scores them
// against the dataset's observed values, one file per seed.
int cmd_evaluate(const Globals& g, const std::vector<std::string>& sources, const std::vector<std::string>& predictions,
                 const std::string& mode)
{
    const auto m = build_request(g, sources);
    const auto data = load_dataset(m);
    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < data.targets.n_rows(); ++r) {
        row_of[data.targets.rows[r]] = r;
    }
    std::vector<std::vector<report::TaskMetrics>> per_seed;
    for (const auto& file : predictions) {
        const auto table = csv::read(file);
        const int smiles_col = table.column("smiles");
        if (smiles_col < 0) {
            throw FormatError(file + ": no smiles column");
        }
        std::vector<report::TaskMetrics> seed_metrics;
        for (std::size_t c = 0; c < data.targets.n_tasks(); ++c) {
            const auto& name = data.targets.tasks[c].name;
            const int col = table.column(name);
            if (col < 0) {
                throw TaskSetMismatch(file + ": no column '" + name + "'");
            }
            std::vector<double> pred, truth;
            for (const auto& row : table.rows) {
                auto it = row_of.find(row[static_cast<std::size_t>(smiles_col)]);
                if (it == row_of.end()) {
                    continue;
                }
                const auto r = static_cast<Eigen::Index>(it->second);
                const auto cc = static_cast<Eigen::Index>(c);
                const double v = parse_cell(row[static_cast<std::size_t>(col)]);
                if (data.targets.observed(r, cc) && !std::isnan(v)) {
                    pred.push_back(v);
                    truth.push_back(data.targets.values(r, cc));
                }
            }
            seed_metrics.push_back(report::compute_metrics(pred, truth, name));
        }
        per_seed.push_back(std::move(seed_metrics));
    }
    const auto rep = report::aggregate_over_seeds(mode, per_seed);
    fs::create_directories(g.out);
    report::write_metrics_csv(fs::path(g.out) / ("metrics_" + mode + ".csv"), rep);
    for (const auto& t : rep.tasks) {
        std::cout << t.task << " mae " << format_sig(t.mae_mean) << " rmse " << format_sig(t.rmse_mean) << " r2 "
                  << format_sig(t.r2_mean) << "\n";
    }
    return 0;
}

std::string mode_from_metrics_path(const fs::path& p)
{
    auto stem = p.stem().string();
    return stem.rfind("metrics_", 0) == 0 ? stem.substr(8) : stem;
}

int cmd_report(const Globals& g, const std::vector<std::string>& metrics)
{
    if (metrics.size() < 2) {
        throw PreconditionError("report needs a reference and at least one other metrics CSV");
    }
    std::vector<report::MetricsReport> reports;
    for (const auto& f : metrics) {
        reports.push_back(report::read_metrics_csv(f, mode_from_metrics_path(f)));
    }
    std::vector<report::Comparison> comparisons;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        comparisons.push_back(report::compare_models(reports[0], reports[i]));
    }
    report::emit_report(comparisons, reports, g.out);
    for (const auto& c : comparisons) {
        std::cout << c.ref_mode << " -> " << c.new_mode << ": " << c.headline() << "\n";
    }
    return 0;
}

int cmd_run_all(const Globals& g, const std::vector<std::string>& sources, bool checkpoints)
{
    const auto request = build_request(g, sources);
    const auto r = run_all(request, g.out, checkpoints);
    for (const auto& c : r.comparisons) {
        std::cout << c.ref_mode << " -> " << c.new_mode << ": " << c.headline() << "\n";
    }
    std::cout << "manifest: " << (fs::path(g.out) / "manifest.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multitask molecular property prediction with synthetic task augmentation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON config or run manifest");
    app.add_option("--threads", g.threads, "worker threads (default: STAUG_THREADS, else 1)");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--seed-list", g.seed_list, "comma-separated CV seeds, e.g. 3,5,7,13,42");
    app.add_flag("--oof-synthetic", g.oof_synthetic, "synthetic targets from the out-of-fold teacher only");
    app.add_option("--synthetic", g.synthetic, "synthetic modes to run: literal, oof or literal,oof");
    app.fallthrough();

    std::vector<std::string> sources;
    auto* featurize = app.add_subcommand("featurize", "compute, transform and prune descriptors");
    featurize->add_option("data", sources, "dataset CSV files")->required();

    BenchmarkOptions bench;
    auto* gen = app.add_subcommand("gen-benchmark", "write a synthetic sparse multitask dataset");
    gen->add_option("--molecules", bench.n_molecules, "number of molecules")->capture_default_str();
    gen->add_option("--tasks", bench.n_tasks, "number of tasks")->capture_default_str();
    gen->add_option("--sparsity", bench.sparsity, "probability an entry is unobserved")->capture_default_str();
    gen->add_option("--noise", bench.noise_sd, "noise sd as a fraction of target sd")->capture_default_str();
    gen->add_option("--seed", bench.seed, "generator seed")->capture_default_str();

    auto* teach = app.add_subcommand("teach", "fit GBT teachers and write synthetic targets");
    teach->add_option("data", sources, "dataset CSV files");

    std::string mode = "gt-sta";
    bool no_checkpoints = false;
    auto* train = app.add_subcommand("train", "cross-validated training of one mode");
    train->add_option("data", sources, "dataset CSV files");
    train->add_option("--mode", mode, "xgb, gt or gt-sta")
        ->check(CLI::IsMember({"xgb", "gt", "gt-sta"}))
        ->capture_default_str();
    train->add_flag("--no-checkpoints", no_checkpoints, "skip writing GT checkpoints");

    std::vector<std::string> predictions;
    std::string eval_mode = "model";
    auto* evaluate = app.add_subcommand("evaluate", "score prediction CSVs against a dataset");
    evaluate->add_option("data", sources, "dataset CSV files");
    evaluate->add_option("--predictions", predictions, "one prediction CSV per seed")->required();
    evaluate->add_option("--mode", eval_mode, "name for the metrics file")->capture_default_str();

    std::vector<std::string> metrics;
    auto* rep = app.add_subcommand("report", "compare metrics CSVs; the first is the reference");
    rep->add_option("metrics", metrics, "metrics_<mode>.csv files")->required();

    auto* run = app.add_subcommand("run-all", "assemble, teach, train every mode and report");
    run->add_option("data", sources, "dataset CSV files");
    run->add_flag("--no-checkpoints", no_checkpoints, "skip writing GT checkpoints");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*featurize) {
            return cmd_featurize(g, sources);
        }
        if (*gen) {
            return cmd_gen_benchmark(g, bench);
        }
        if (*teach) {
            return cmd_teach(g, sources);
        }
        if (*train) {
            return cmd_train(g, sources, mode, !no_checkpoints);
        }
        if (*evaluate) {
            return cmd_evaluate(g, sources, predictions, eval_mode);
        }
        if (*rep) {
            return cmd_report(g, metrics);
        }
        if (*run) {
            return cmd_run_all(g, sources, !no_checkpoints);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
