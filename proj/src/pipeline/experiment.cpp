#include "staug/pipeline/experiment.hpp"

#include "staug/common/error.hpp"
#include "staug/common/hash.hpp"
#include "staug/common/numfmt.hpp"
#include "staug/common/parallel.hpp"
#include "staug/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace staug::pipeline {

namespace fs = std::filesystem;

const char* to_string(Mode m)
{
    switch (m) {
    case Mode::Xgb:
        return "xgb";
    case Mode::GtNaive:
        return "gt_naive";
    case Mode::GtSta:
        return "gt_sta";
    }
    return "?";
}

Mode mode_from_string(const std::string& s)
{
    if (s == "xgb" || s == "xgb_baseline") {
        return Mode::Xgb;
    }
    if (s == "gt" || s == "gt_naive" || s == "gt-naive") {
        return Mode::GtNaive;
    }
    if (s == "gt-sta" || s == "gt_sta") {
        return Mode::GtSta;
    }
    throw PreconditionError("unknown mode '" + s + "'");
}

const char* to_string(SyntheticMode m) { return m == SyntheticMode::Literal ? "literal" : "oof"; }

SyntheticMode synthetic_mode_from_string(const std::string& s)
{
    if (s == "literal") {
        return SyntheticMode::Literal;
    }
    if (s == "oof") {
        return SyntheticMode::OutOfFold;
    }
    throw PreconditionError("unknown synthetic mode '" + s + "'");
}

std::string report_name(Mode m, SyntheticMode s)
{
    std::string name = to_string(m);
    if (m == Mode::GtSta && s == SyntheticMode::OutOfFold) {
        name += "_oof";
    }
    return name;
}

void ExperimentConfig::validate() const
{
    gbt.validate();
    gt.validate();
    if (seeds.empty()) {
        throw PreconditionError("empty seed list");
    }
    if (k < 2) {
        throw PreconditionError("k must be at least 2");
    }
    if (synthetic.empty()) {
        throw PreconditionError("no synthetic mode selected");
    }
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw PreconditionError("val_fraction must lie in (0, 1)");
    }
}

desc::FeatureMatrix prepare_features(const std::vector<chem::MolGraph>& mols, const FeatureOptions& opts, int threads)
{
    auto m = desc::build_feature_matrix(mols, threads);
    m = desc::arcsinh_pretransform(m, opts.arcsinh_threshold);
    return desc::prune_features(m, opts.prune);
}

namespace {

std::vector<std::size_t> experimental_columns(const SparseTargetMatrix& y)
{
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < y.n_tasks(); ++c) {
        if (y.kinds[c] == TaskKind::Experimental) {
            out.push_back(c);
        }
    }
    return out;
}

bool obs(const SparseTargetMatrix& y, std::size_t r, std::size_t c)
{
    return y.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) != 0;
}

std::string teacher_key(const desc::FeatureMatrix& x, const SparseTargetMatrix& y, const CvPlan& plan,
                        std::size_t seed_index, const gbt::GbtParams& p)
{
    Fnv1a h;
    h.update_u64(x.fingerprint());
    h.update(plan.hash());
    h.update_u64(seed_index);
    for (auto c : experimental_columns(y)) {
        h.update(y.tasks[c].name);
        for (std::size_t r = 0; r < y.n_rows(); ++r) {
            h.update_double(obs(y, r, c) ? y.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) : NAN);
        }
    }
    for (double v : {double(p.n_rounds), double(p.max_depth), p.learning_rate, p.lambda, p.gamma, p.min_child_weight,
                     p.subsample, p.colsample}) {
        h.update_double(v);
    }
    return h.hex();
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::vector<std::pair<std::size_t, std::string>> degenerate_tasks(const SparseTargetMatrix& y, const CvPlan& plan)
{
    std::vector<std::pair<std::size_t, std::string>> out;
    for (auto c : experimental_columns(y)) {
        std::size_t total = 0;
        for (std::size_t r = 0; r < y.n_rows(); ++r) {
            total += obs(y, r, c) ? 1 : 0;
        }
        if (total < static_cast<std::size_t>(plan.k)) {
            out.emplace_back(c, std::to_string(total) + " observed rows for " + std::to_string(plan.k) + " folds");
            continue;
        }
        bool bad = false;
        for (std::size_t s = 0; s < plan.seeds.size() && !bad; ++s) {
            std::vector<std::size_t> per_fold(static_cast<std::size_t>(plan.k), 0);
            for (std::size_t r = 0; r < y.n_rows(); ++r) {
                per_fold[static_cast<std::size_t>(plan.assignment[s][r])] += obs(y, r, c) ? 1 : 0;
            }
            for (int f = 0; f < plan.k && !bad; ++f) {
                if (total - per_fold[static_cast<std::size_t>(f)] < 2) {
                    out.emplace_back(c, "seed " + std::to_string(plan.seeds[s]) + " fold " + std::to_string(f) +
                                            " leaves fewer than 2 training observations");
                    bad = true;
                }
            }
        }
    }
    return out;
}

TeacherSet train_teachers(const desc::FeatureMatrix& x, const SparseTargetMatrix& y, const CvPlan& plan,
                          std::size_t seed_index, const gbt::GbtParams& params, int threads, LeakageAudit* audit,
                          const std::optional<fs::path>& cache_dir)
{
    if (x.rows != y.n_rows() || plan.n_rows != y.n_rows()) {
        throw DimensionMismatch("features, targets and plan disagree on the row count");
    }
    const auto cols = experimental_columns(y);
    const auto k = static_cast<std::size_t>(plan.k);
    const auto& fold_of = plan.assignment.at(seed_index);
    const std::uint64_t seed = plan.seeds[seed_index];

    TeacherSet set;
    set.seed_index = seed_index;
    set.models.assign(k, std::vector<gbt::GbtModel>(cols.size()));

    fs::path dir;
    std::string key;
    bool cached = false;
    if (cache_dir) {
        dir = *cache_dir / ("seed" + std::to_string(seed));
        key = teacher_key(x, y, plan, seed_index, params);
        cached = fs::exists(dir / "key.txt") && read_text(dir / "key.txt") == key + "\n";
    }

    parallel_for(k * cols.size(), threads, [&](std::size_t job) {
        const auto f = static_cast<int>(job / cols.size());
        const auto t = job % cols.size();
        const auto c = cols[t];
        std::vector<double> yv(y.n_rows(), NAN);
        std::vector<std::size_t> used;
        for (std::size_t r = 0; r < y.n_rows(); ++r) {
            if (fold_of[r] != f && obs(y, r, c)) {
                yv[r] = y.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                used.push_back(r);
            }
        }
        const auto file = dir / ("fold" + std::to_string(f)) / (y.tasks[c].name + ".json");
        if (cached && fs::exists(file)) {
            set.models[static_cast<std::size_t>(f)][t] = gbt::load_model(file);
        } else {
            auto p = params;
            p.seed = derive_seed(seed, {static_cast<std::uint64_t>(f), t});
            set.models[static_cast<std::size_t>(f)][t] = gbt::fit_gbt(x, yv, p);
        }
        if (audit) {
            audit->record("teacher:" + y.tasks[c].name, seed_index, f, std::move(used));
        }
    });

    if (cache_dir && !cached) {
        for (std::size_t f = 0; f < k; ++f) {
            fs::create_directories(dir / ("fold" + std::to_string(f)));
            for (std::size_t t = 0; t < cols.size(); ++t) {
                gbt::save_model(dir / ("fold" + std::to_string(f)) / (y.tasks[cols[t]].name + ".json"), set.models[f][t]);
            }
        }
        std::ofstream(dir / "key.txt", std::ios::binary) << key << "\n";
    }

    for (std::size_t f = 0; f < k; ++f) {
        gt::Mat p(static_cast<Eigen::Index>(y.n_rows()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const auto v = gbt::predict_gbt(set.models[f][t], x);
            for (std::size_t r = 0; r < v.size(); ++r) {
                p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = v[r];
            }
        }
        set.fold_predictions.push_back(std::move(p));
    }
    return set;
}

gt::Mat combine_teacher_predictions(const std::vector<gt::Mat>& fold_predictions, const std::vector<int>& fold_of,
                                    SyntheticMode mode)
{
    if (fold_predictions.empty()) {
        throw PreconditionError("no teacher predictions");
    }
    const auto& first = fold_predictions.front();
    if (static_cast<std::size_t>(first.rows()) != fold_of.size()) {
        throw DimensionMismatch("teacher predictions and fold assignment disagree on the row count");
    }
    gt::Mat out(first.rows(), first.cols());
    if (mode == SyntheticMode::Literal) {
        out.setZero();
        for (const auto& p : fold_predictions) {
            out += p;
        }
        out /= static_cast<double>(fold_predictions.size());
    } else {
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            out.row(r) = fold_predictions.at(static_cast<std::size_t>(fold_of[static_cast<std::size_t>(r)])).row(r);
        }
    }
    return out;
}

SparseTargetMatrix with_synthetic(const SparseTargetMatrix& y, const gt::Mat& synthetic)
{
    const auto cols = experimental_columns(y);
    if (static_cast<std::size_t>(synthetic.rows()) != y.n_rows() || static_cast<std::size_t>(synthetic.cols()) != cols.size()) {
        throw DimensionMismatch("synthetic matrix must be rows x experimental tasks");
    }
    if (!synthetic.allFinite()) {
        throw PreconditionError("synthetic targets must be finite");
    }
    SparseTargetMatrix out = y;
    const auto n = static_cast<Eigen::Index>(y.n_rows());
    const auto t0 = static_cast<Eigen::Index>(y.n_tasks());
    const auto ts = synthetic.cols();
    out.values.conservativeResize(n, t0 + ts);
    out.observed.conservativeResize(n, t0 + ts);
    out.values.rightCols(ts) = synthetic;
    out.observed.rightCols(ts).setOnes();
    for (auto c : cols) {
        out.tasks.push_back({y.tasks[c].name + "_syn", y.tasks[c].unit, y.tasks[c].allow_metals});
        out.kinds.push_back(TaskKind::Synthetic);
    }
    return out;
}

SyntheticTargets generate_synthetic_targets(const desc::FeatureMatrix& x, const SparseTargetMatrix& y,
                                            const CvPlan& plan, std::size_t seed_index,
                                            const gbt::GbtParams& params, SyntheticMode mode, int threads,
                                            LeakageAudit* audit, const std::optional<fs::path>& cache_dir)
{
    SyntheticTargets out;
    out.teachers = train_teachers(x, y, plan, seed_index, params, threads, audit, cache_dir);
    out.values = combine_teacher_predictions(out.teachers.fold_predictions, plan.assignment.at(seed_index), mode);
    out.observed = gt::MaskMat::Ones(out.values.rows(), out.values.cols());
    return out;
}

std::vector<std::size_t> inner_validation_split(const gt::MaskMat& observed, std::size_t n_experimental,
                                                const std::vector<std::size_t>& train_rows, double fraction,
                                                std::uint64_t seed)
{
    std::map<std::string, std::vector<std::size_t>> groups;
    for (auto r : train_rows) {
        std::string pattern(n_experimental, '0');
        for (std::size_t c = 0; c < n_experimental; ++c) {
            pattern[c] = observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) ? '1' : '0';
        }
        groups[pattern].push_back(r);
    }
    Rng rng(seed);
    std::vector<std::size_t> val;
    double cum = 0.0;
    long taken = 0;
    for (auto& [pattern, rows] : groups) {
        rng.shuffle(std::span<std::size_t>(rows));
        cum += fraction * static_cast<double>(rows.size());
        const long want = std::lround(cum) - taken;
        for (long i = 0; i < want; ++i) {
            val.push_back(rows[static_cast<std::size_t>(i)]);
        }
        taken += want;
    }
    if (val.empty() && train_rows.size() >= 2) {
        const auto largest = std::max_element(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
            return a.second.size() < b.second.size();
        });
        val.push_back(largest->second.front());
    }
    std::sort(val.begin(), val.end());
    return val;
}

gt::GtConfig gt_config_for(const ExperimentConfig& cfg, std::uint64_t seed, int fold, int n_tasks)
{
    gt::GtConfig gc = cfg.gt;
    gc.n_tasks = n_tasks;
    gc.seed = derive_seed(seed, {static_cast<std::uint64_t>(fold)});
    return gc;
}

GtFoldResult run_gt_fold(const std::vector<gt::GraphSample>& graphs, const SparseTargetMatrix& y, const CvPlan& plan,
                         std::size_t seed_index, int fold, const ExperimentConfig& cfg, const std::string& stage,
                         LeakageAudit* audit)
{
    const auto exp_cols = experimental_columns(y);
    const std::size_t n_exp = exp_cols.size();
    for (std::size_t c = 0; c < n_exp; ++c) {
        if (exp_cols[c] != c) {
            throw PreconditionError("experimental columns must precede synthetic ones");
        }
    }
    const std::uint64_t seed = plan.seeds.at(seed_index);
    const auto train = plan.train_rows(seed_index, fold);
    GtFoldResult out;
    out.test_rows = plan.test_rows(seed_index, fold);
    const auto val = inner_validation_split(y.observed, n_exp, train, cfg.val_fraction,
                                            derive_seed(seed, {static_cast<std::uint64_t>(fold), 0x76616c}));
    std::vector<std::size_t> inner;
    std::set_difference(train.begin(), train.end(), val.begin(), val.end(), std::back_inserter(inner));

    const auto t = static_cast<Eigen::Index>(y.n_tasks());
    auto gather = [&](const std::vector<std::size_t>& rows, gt::Mat& v, gt::MaskMat& m) {
        v.resize(static_cast<Eigen::Index>(rows.size()), t);
        m.resize(static_cast<Eigen::Index>(rows.size()), t);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            v.row(static_cast<Eigen::Index>(i)) = y.values.row(static_cast<Eigen::Index>(rows[i]));
            m.row(static_cast<Eigen::Index>(i)) = y.observed.row(static_cast<Eigen::Index>(rows[i]));
        }
    };
    gt::Mat inner_values;
    gt::MaskMat inner_mask;
    gather(inner, inner_values, inner_mask);
    const auto standardizer = gt::TaskStandardizer::fit(inner_values, inner_mask);

    auto make_data = [&](const std::vector<std::size_t>& rows, const std::string& tag) {
        gt::GtData d;
        gather(rows, d.targets, d.observed);
        d.targets = standardizer.transform(d.targets);
        std::vector<std::size_t> labelled;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            d.graphs.push_back(&graphs.at(rows[i]));
            bool any = false;
            for (Eigen::Index c = 0; c < t; ++c) {
                if (!d.observed(static_cast<Eigen::Index>(i), c)) {
                    d.targets(static_cast<Eigen::Index>(i), c) = 0.0;
                } else if (static_cast<std::size_t>(c) < n_exp) {
                    any = true;
                }
            }
            if (any) {
                labelled.push_back(rows[i]);
            }
        }
        if (audit) {
            audit->record(stage + ":" + tag, seed_index, fold, std::move(labelled));
        }
        return d;
    };
    const auto train_data = make_data(inner, "train");
    const auto val_data = make_data(val, "val");

    const auto gc = gt_config_for(cfg, seed, fold, static_cast<int>(t));
    gt::TrainOptions opts;
    opts.task_weight = Eigen::VectorXd::Ones(t);
    opts.val_task_weight = Eigen::VectorXd::Zero(t);
    opts.val_task_weight.head(static_cast<Eigen::Index>(n_exp)).setOnes();
    auto result = gt::train_gt(gc, train_data, val_data, opts);

    std::vector<const gt::GraphSample*> test_graphs;
    for (auto r : out.test_rows) {
        test_graphs.push_back(&graphs.at(r));
    }
    const gt::Mat pred = standardizer.inverse(gt::predict(result.model, test_graphs, gc.batch_size));
    out.test_predictions = pred.leftCols(static_cast<Eigen::Index>(n_exp));
    out.log = std::move(result.log);
    out.model = std::move(result.model);
    return out;
}

const ModeOutcome& ExperimentResult::find(const std::string& name) const
{
    for (const auto& m : modes) {
        if (m.name == name) {
            return m;
        }
    }
    throw PreconditionError("no mode '" + name + "' in experiment result");
}

void write_predictions(const fs::path& path, const SparseTargetMatrix& y, const gt::Mat& pred,
                       const std::vector<int>& fold_of)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    std::vector<std::string> header{"smiles", "fold"};
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        header.push_back(y.tasks[static_cast<std::size_t>(c)].name);
    }
    csv::write_row(out, header);
    for (std::size_t r = 0; r < y.n_rows(); ++r) {
        std::vector<std::string> row{y.rows[r], std::to_string(fold_of[r])};
        for (Eigen::Index c = 0; c < pred.cols(); ++c) {
            row.push_back(format_exact(pred(static_cast<Eigen::Index>(r), c)));
        }
        csv::write_row(out, row);
    }
}

namespace {

std::vector<report::TaskMetrics> score(const SparseTargetMatrix& y, const gt::Mat& pred)
{
    std::vector<report::TaskMetrics> out;
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        std::vector<double> p, truth;
        for (Eigen::Index r = 0; r < pred.rows(); ++r) {
            if (y.observed(r, c)) {
                p.push_back(pred(r, c));
                truth.push_back(y.values(r, c));
            }
        }
        out.push_back(report::compute_metrics(p, truth, y.tasks[static_cast<std::size_t>(c)].name));
    }
    return out;
}

struct Variant {
    std::string name;
    Mode mode;
    SyntheticMode synthetic = SyntheticMode::Literal;
};

} // namespace

ExperimentResult run_experiment(const Dataset& data, const desc::FeatureMatrix& x, const CvPlan& plan,
                                const ExperimentConfig& cfg, const std::vector<Mode>& modes,
                                const std::optional<ArtifactOptions>& artifacts)
{
    cfg.validate();
    const auto& y = data.targets;
    y.validate();
    if (y.n_experimental() != y.n_tasks()) {
        throw PreconditionError("input targets must be experimental only");
    }
    if (x.rows != y.n_rows() || plan.n_rows != y.n_rows() || data.mols.size() != y.n_rows()) {
        throw DimensionMismatch("dataset, features and plan disagree on the row count");
    }
    if (modes.empty()) {
        throw PreconditionError("no modes requested");
    }
    const int threads = resolve_threads(cfg.threads);

    std::vector<Variant> variants;
    for (auto m : modes) {
        if (m == Mode::GtSta) {
            for (auto s : cfg.synthetic) {
                variants.push_back({report_name(m, s), m, s});
            }
        } else {
            variants.push_back({report_name(m), m});
        }
    }
    const bool need_teachers = std::any_of(modes.begin(), modes.end(), [](Mode m) { return m != Mode::GtNaive; });
    const bool need_graphs = std::any_of(modes.begin(), modes.end(), [](Mode m) { return m != Mode::Xgb; });

    std::vector<gt::GraphSample> graphs;
    if (need_graphs) {
        graphs.resize(data.mols.size());
        parallel_for(data.mols.size(), threads, [&](std::size_t i) { graphs[i] = gt::featurize_graph(data.mols[i]); });
    }

    ExperimentResult result;
    for (const auto& v : variants) {
        result.modes.push_back({v.name, {}, {}, {}, {}});
    }
    std::optional<fs::path> teacher_cache;
    if (artifacts) {
        teacher_cache = artifacts->dir / "teachers";
    }

    const auto n = static_cast<Eigen::Index>(y.n_rows());
    const auto t = static_cast<Eigen::Index>(y.n_tasks());
    for (std::size_t s = 0; s < plan.seeds.size(); ++s) {
        const auto& fold_of = plan.assignment[s];
        TeacherSet teachers;
        if (need_teachers) {
            teachers = train_teachers(x, y, plan, s, cfg.gbt, threads, &result.audit, teacher_cache);
        }

        struct Job {
            std::size_t variant;
            int fold;
        };
        std::vector<Job> jobs;
        std::vector<SparseTargetMatrix> targets(variants.size());
        for (std::size_t v = 0; v < variants.size(); ++v) {
            auto& out = result.modes[v];
            out.predictions.push_back(gt::Mat::Constant(n, t, NAN));
            if (variants[v].mode == Mode::Xgb) {
                out.predictions.back() =
                    combine_teacher_predictions(teachers.fold_predictions, fold_of, SyntheticMode::OutOfFold);
                continue;
            }
            targets[v] = variants[v].mode == Mode::GtSta
                             ? with_synthetic(y, combine_teacher_predictions(teachers.fold_predictions, fold_of,
                                                                             variants[v].synthetic))
                             : y;
            for (int f = 0; f < plan.k; ++f) {
                jobs.push_back({v, f});
            }
        }

        std::vector<GtFoldResult> fold_results(jobs.size());
        parallel_for(jobs.size(), threads, [&](std::size_t j) {
            const auto& job = jobs[j];
            fold_results[j] = run_gt_fold(graphs, targets[job.variant], plan, s, job.fold, cfg,
                                          variants[job.variant].name, &result.audit);
        });

        for (auto& m : result.modes) {
            m.logs.emplace_back();
        }
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto& job = jobs[j];
            auto& out = result.modes[job.variant];
            const auto& fr = fold_results[j];
            for (std::size_t i = 0; i < fr.test_rows.size(); ++i) {
                out.predictions.back().row(static_cast<Eigen::Index>(fr.test_rows[i])) =
                    fr.test_predictions.row(static_cast<Eigen::Index>(i));
            }
            out.logs.back().push_back(fr.log);
            if (artifacts) {
                const auto dir = artifacts->dir / "gt" / out.name;
                fs::create_directories(dir);
                const auto stem = "seed" + std::to_string(plan.seeds[s]) + "_fold" + std::to_string(job.fold);
                gt::write_training_log(dir / (stem + "_log.csv"), fr.log);
                if (artifacts->checkpoints) {
                    gt::save_checkpoint(dir / (stem + ".ckpt"), fr.model);
                }
            }
        }
        for (auto& out : result.modes) {
            out.per_seed.push_back(score(y, out.predictions.back()));
            if (artifacts) {
                fs::create_directories(artifacts->dir / "predictions");
                write_predictions(artifacts->dir / "predictions" /
                                      (out.name + "_seed" + std::to_string(plan.seeds[s]) + ".csv"),
                                  y, out.predictions.back(), fold_of);
            }
        }
    }
    for (auto& out : result.modes) {
        out.report = report::aggregate_over_seeds(out.name, out.per_seed);
    }
    return result;
}

} // namespace staug::pipeline
