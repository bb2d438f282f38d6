#include "staug/chem/smiles.hpp"
#include "staug/common/error.hpp"
#include "staug/common/numfmt.hpp"
#include "staug/common/rng.hpp"
#include "staug/gbt/gbt.hpp"
#include "staug/pipeline/benchmark.hpp"
#include "staug/pipeline/run.hpp"
#include "staug/report/metrics.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

using namespace staug;
using namespace staug::pipeline;
namespace fs = std::filesystem;

namespace {

NamedTable table(const std::string& name, const std::string& text) { return {name, csv::parse(text)}; }

std::size_t row_of(const Dataset& d, const std::string& smiles)
{
    const auto key = chem::canonicalize(smiles);
    for (std::size_t r = 0; r < d.targets.n_rows(); ++r) {
        if (d.targets.rows[r] == key) {
            return r;
        }
    }
    return static_cast<std::size_t>(-1);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Small end-to-end settings: everything shrunk so a full run takes seconds.
ExperimentConfig tiny_config()
{
    ExperimentConfig c;
    c.seeds = {3};
    c.k = 3;
    c.gbt.n_rounds = 20;
    c.gbt.max_depth = 3;
    c.gt.layers = 1;
    c.gt.heads = 2;
    c.gt.hidden_dim = 8;
    c.gt.head_hidden = 8;
    c.gt.max_epochs = 3;
    c.gt.patience = 2;
    c.gt.batch_size = 16;
    c.synthetic = {SyntheticMode::Literal, SyntheticMode::OutOfFold};
    return c;
}

Dataset small_benchmark(std::size_t n, double sparsity, double noise, const std::string& family = "intensive")
{
    BenchmarkOptions o;
    o.n_molecules = n;
    o.n_tasks = 3;
    o.sparsity = sparsity;
    o.noise_sd = noise;
    o.seed = 11;
    o.task_family = family;
    const auto b = generate_benchmark(o);
    std::ostringstream text;
    text << "smiles";
    for (const auto& t : b.tasks) {
        text << "," << t.name;
    }
    text << "\n";
    for (std::size_t r = 0; r < b.smiles.size(); ++r) {
        text << b.smiles[r];
        for (std::size_t c = 0; c < b.tasks.size(); ++c) {
            text << ",";
            if (b.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) {
                text << format_exact(b.noisy(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
            }
        }
        text << "\n";
    }
    return assemble_dataset({table("bench.csv", text.str())});
}

} // namespace

TEST(Assemble, MergesFilesOnCanonicalKey)
{
    const auto d = assemble_dataset({table("a.csv", "smiles,density\nCCO,789\n"),
                                     table("b.csv", "smiles,logP\nOCC,-0.31\n")});
    ASSERT_EQ(d.targets.n_rows(), 1U);
    ASSERT_EQ(d.targets.n_tasks(), 2U);
    EXPECT_TRUE(d.targets.observed(0, 0));
    EXPECT_TRUE(d.targets.observed(0, 1));
    EXPECT_EQ(d.targets.values(0, 0), 789);
    EXPECT_EQ(d.targets.values(0, 1), -0.31);
    d.targets.validate();
}

TEST(Assemble, DuplicateValuesTakeMedian)
{
    const auto d = assemble_dataset({table("a.csv", "smiles,density\nCCO,789\nC(O)C,791\n")});
    ASSERT_EQ(d.targets.n_rows(), 1U);
    EXPECT_EQ(d.targets.values(0, 0), 790);
    EXPECT_EQ(median({3, 1, 2}), 2);
    EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Assemble, SingleHeavyAtomDroppedWithReason)
{
    const auto d = assemble_dataset({table("a.csv", "smiles,density\nC,0.4\nCC,0.5\n")});
    ASSERT_EQ(d.targets.n_rows(), 1U);
    EXPECT_EQ(d.targets.rows[0], "CC");
    ASSERT_EQ(d.issues.size(), 1U);
    EXPECT_EQ(d.issues[0].line, 1U);
    EXPECT_NE(d.issues[0].reason.find("single-heavy-atom"), std::string::npos);
}

TEST(Assemble, MetalsOnlyWhereAllowed)
{
    const std::string text = "smiles,logS,density\nCC(=O)[O-].[Na+],0.1,1.5\nCCO,-0.2,0.8\n";
    const auto strict = assemble_dataset({table("a.csv", text)});
    EXPECT_EQ(strict.targets.n_rows(), 1U);
    const auto tolerant = assemble_dataset({table("a.csv", text)}, {{"logS", "", true}, {"density", "", false}});
    ASSERT_EQ(tolerant.targets.n_rows(), 2U);
    const auto salt = row_of(tolerant, "CC(=O)[O-].[Na+]");
    ASSERT_LT(salt, 2U);
    EXPECT_TRUE(tolerant.targets.observed(static_cast<Eigen::Index>(salt), 0));
    EXPECT_FALSE(tolerant.targets.observed(static_cast<Eigen::Index>(salt), 1));
}

TEST(Assemble, ParseFailuresAreLoggedNotFatal)
{
    const auto d = assemble_dataset({table("a.csv", "smiles,y\nC1CC,1\nCC,2\nCCC,\n")});
    EXPECT_EQ(d.targets.n_rows(), 1U);
    ASSERT_EQ(d.issues.size(), 1U);
    EXPECT_NE(d.issues[0].reason.find("ParseFailure"), std::string::npos);
    EXPECT_THROW(assemble_dataset({table("a.csv", "smiles,y\nC1CC,1\nC,2\n")}), NoUsableRows);
    EXPECT_THROW(assemble_dataset({table("a.csv", "mol,y\nCC,1\n")}), PreconditionError);
    EXPECT_THROW(assemble_dataset({table("a.csv", "smiles,y\nCC,1\n")}, {{"z", "", false}}), PreconditionError);
}

TEST(CvPlanTest, TenRowsFiveFolds)
{
    const auto plan = make_cv_plan(10, {42}, 5);
    for (int f = 0; f < 5; ++f) {
        EXPECT_EQ(plan.test_rows(0, f).size(), 2U);
        EXPECT_EQ(plan.train_rows(0, f).size(), 8U);
    }
    EXPECT_EQ(make_cv_plan(10, {42}, 5).assignment, plan.assignment);
    EXPECT_EQ(make_cv_plan(10, {42}, 5).hash(), plan.hash());
    EXPECT_THROW(make_cv_plan(4, {42}, 5), TooFewRows);
}

TEST(CvPlanTest, PartitionAndBalanceProperties)
{
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.index(200);
        const int k = 2 + static_cast<int>(rng.index(6));
        if (n < static_cast<std::size_t>(k)) {
            continue;
        }
        const auto plan = make_cv_plan(n, kDefaultSeeds, k);
        ASSERT_EQ(plan.assignment.size(), kDefaultSeeds.size());
        for (std::size_t s = 0; s < kDefaultSeeds.size(); ++s) {
            std::size_t lo = n, hi = 0, total = 0;
            for (int f = 0; f < k; ++f) {
                const auto sz = plan.test_rows(s, f).size();
                lo = std::min(lo, sz);
                hi = std::max(hi, sz);
                total += sz;
            }
            EXPECT_EQ(total, n);
            EXPECT_LE(hi - lo, 1U);
        }
    }
    const auto plan = make_cv_plan(100, kDefaultSeeds, 5);
    EXPECT_NE(plan.assignment[0], plan.assignment[1]);
}

TEST(CvPlanTest, SeedsRecordedVerbatimInManifest)
{
    RunManifest m;
    m.sources = {"data.csv"};
    const auto json = manifest_to_json(m);
    EXPECT_NE(json.find("\"seeds\": [\n      3,\n      5,\n      7,\n      13,\n      42\n    ]"), std::string::npos) << json;
    const auto back = manifest_from_json(json);
    EXPECT_EQ(back.config.seeds, kDefaultSeeds);
    EXPECT_EQ(manifest_to_json(back), json);
}

TEST(Manifest, PartialConfigKeepsDefaults)
{
    const auto m = manifest_from_json(R"({"gt": {"hidden_dim": 32}, "synthetic": ["oof"], "modes": ["gt-sta"]})");
    EXPECT_EQ(m.config.gt.hidden_dim, 32);
    EXPECT_EQ(m.config.gt.layers, 4);
    EXPECT_EQ(m.config.gbt.n_rounds, 300);
    EXPECT_EQ(m.config.k, 5);
    ASSERT_EQ(m.config.synthetic.size(), 1U);
    EXPECT_EQ(m.config.synthetic[0], SyntheticMode::OutOfFold);
    ASSERT_EQ(m.modes.size(), 1U);
    EXPECT_EQ(m.modes[0], Mode::GtSta);
    EXPECT_THROW(manifest_from_json("{"), FormatError);
    EXPECT_THROW(manifest_from_json(R"({"modes": ["bogus"]})"), PreconditionError);
}

TEST(Synthetic, MeanOfTeachers)
{
    const std::vector<int> fold_of{0, 1, 2, 3, 4};
    std::vector<gt::Mat> constant(5, gt::Mat::Constant(5, 2, 7.25));
    const auto c = combine_teacher_predictions(constant, fold_of, SyntheticMode::Literal);
    EXPECT_TRUE((c.array() == 7.25).all());

    std::vector<gt::Mat> preds;
    for (int f = 0; f < 5; ++f) {
        preds.push_back(gt::Mat::Constant(5, 1, f + 1.0));
    }
    const auto mean = combine_teacher_predictions(preds, fold_of, SyntheticMode::Literal);
    EXPECT_TRUE((mean.array() == 3.0).all());
    const auto oof = combine_teacher_predictions(preds, fold_of, SyntheticMode::OutOfFold);
    for (int r = 0; r < 5; ++r) {
        EXPECT_EQ(oof(r, 0), r + 1.0);
    }
}

TEST(Synthetic, ColumnsAreDense)
{
    const auto d = small_benchmark(150, 0.6, 0.1);
    const auto plan = make_cv_plan(d.targets.n_rows(), {3, 5}, 5);
    const auto x = prepare_features(d.mols, {}, 1);
    gbt::GbtParams p;
    p.n_rounds = 10;
    for (auto mode : {SyntheticMode::Literal, SyntheticMode::OutOfFold}) {
        for (std::size_t s = 0; s < plan.seeds.size(); ++s) {
            const auto syn = generate_synthetic_targets(x, d.targets, plan, s, p, mode);
            EXPECT_TRUE((syn.observed.array() == 1).all());
            EXPECT_TRUE(syn.values.allFinite());
            const auto aug = with_synthetic(d.targets, syn.values);
            EXPECT_EQ(aug.n_tasks(), 2 * d.targets.n_tasks());
            EXPECT_EQ(aug.n_experimental(), d.targets.n_tasks());
            EXPECT_TRUE((aug.observed.rightCols(3).array() == 1).all());
            aug.validate();
        }
    }
}

TEST(Synthetic, DegenerateTasksDetected)
{
    const auto d = assemble_dataset({table("a.csv", "smiles,a,b\nCC,1,\nCCC,2,\nCCCC,3,\nCCO,4,5\nCCN,5,\nCCS,6,\n")});
    const auto plan = make_cv_plan(d.targets.n_rows(), {3}, 5);
    const auto bad = degenerate_tasks(d.targets, plan);
    ASSERT_EQ(bad.size(), 1U);
    EXPECT_EQ(bad[0].first, 1U);
}

TEST(InnerSplit, StratifiedDisjointTenPercent)
{
    const auto d = small_benchmark(400, 0.5, 0.1);
    const auto plan = make_cv_plan(d.targets.n_rows(), {7}, 5);
    const auto train = plan.train_rows(0, 2);
    const auto val = inner_validation_split(d.targets.observed, 3, train, 0.1, 99);
    EXPECT_NEAR(static_cast<double>(val.size()), 0.1 * static_cast<double>(train.size()), 1.0);
    std::set<std::size_t> tr(train.begin(), train.end());
    for (auto r : val) {
        EXPECT_TRUE(tr.count(r));
    }
    // each observation pattern keeps its share within one row
    std::map<std::string, std::pair<int, int>> share;
    std::set<std::size_t> vs(val.begin(), val.end());
    for (auto r : train) {
        std::string pat;
        for (int c = 0; c < 3; ++c) {
            pat += d.targets.observed(static_cast<Eigen::Index>(r), c) ? '1' : '0';
        }
        share[pat].first++;
        share[pat].second += vs.count(r) ? 1 : 0;
    }
    for (const auto& [pat, counts] : share) {
        EXPECT_LE(std::abs(counts.second - 0.1 * counts.first), 1.0) << pat;
    }
    EXPECT_EQ(inner_validation_split(d.targets.observed, 3, train, 0.1, 99), val);
}

TEST(InitSharing, NaiveAndStaDifferOnlyInProjection)
{
    const auto cfg = tiny_config();
    const gt::GtModel naive(gt_config_for(cfg, 13, 2, 6));
    const gt::GtModel sta(gt_config_for(cfg, 13, 2, 12));
    ASSERT_EQ(naive.params().size(), sta.params().size());
    for (std::size_t i = 0; i < naive.params().size(); ++i) {
        const auto& a = naive.params()[i];
        const auto& b = sta.params()[i];
        if (gt::GtModel::is_head_projection(a.name)) {
            EXPECT_NE(a.value.size(), b.value.size());
            continue;
        }
        ASSERT_EQ(a.value.rows(), b.value.rows()) << a.name;
        EXPECT_EQ(0, std::memcmp(a.value.data(), b.value.data(), sizeof(double) * static_cast<std::size_t>(a.value.size())))
            << a.name;
    }
}

TEST(Experiment, NoHeldOutLabelsReachTraining)
{
    const auto d = small_benchmark(120, 0.5, 0.1);
    const auto x = prepare_features(d.mols, {}, 1);
    const auto cfg = tiny_config();
    const auto plan = make_cv_plan(d.targets.n_rows(), cfg.seeds, cfg.k);
    const auto r = run_experiment(d, x, plan, cfg, {Mode::Xgb, Mode::GtNaive, Mode::GtSta});
    const auto entries = r.audit.entries();
    // 3 teacher tasks x 3 folds, plus train/val tags for 3 GT variants x 3 folds
    EXPECT_EQ(entries.size(), 9U + 18U);
    EXPECT_TRUE(r.audit.violations(plan).empty());
    for (const auto& e : entries) {
        EXPECT_FALSE(e.rows.empty()) << e.stage;
    }
    ASSERT_EQ(r.modes.size(), 4U);
    EXPECT_EQ(r.modes[0].name, "xgb");
    EXPECT_EQ(r.modes[1].name, "gt_naive");
    EXPECT_EQ(r.modes[2].name, "gt_sta");
    EXPECT_EQ(r.modes[3].name, "gt_sta_oof");
    for (const auto& m : r.modes) {
        EXPECT_TRUE(m.predictions[0].allFinite()) << m.name; // every row predicted once
        EXPECT_EQ(m.report.tasks.size(), 3U);
    }

    // negative control: a read of a held-out row is reported
    LeakageAudit audit;
    audit.record("probe", 0, 1, {plan.test_rows(0, 1).front()});
    EXPECT_EQ(audit.violations(plan).size(), 1U);
}

TEST(Experiment, XgbBaselineIsOutOfFoldTeacher)
{
    const auto d = small_benchmark(100, 0.3, 0.1);
    const auto x = prepare_features(d.mols, {}, 1);
    auto cfg = tiny_config();
    const auto plan = make_cv_plan(d.targets.n_rows(), cfg.seeds, cfg.k);
    const auto r = run_experiment(d, x, plan, cfg, {Mode::Xgb});
    const auto teachers = train_teachers(x, d.targets, plan, 0, cfg.gbt, 1);
    for (std::size_t row = 0; row < d.targets.n_rows(); ++row) {
        const int f = plan.assignment[0][row];
        const auto i = static_cast<Eigen::Index>(row);
        EXPECT_EQ(r.modes[0].predictions[0].row(i), teachers.fold_predictions[static_cast<std::size_t>(f)].row(i));
    }
    // 3 tasks x 3 folds x 1 seed
    std::size_t models = 0;
    for (const auto& fold : teachers.models) {
        models += fold.size();
    }
    EXPECT_EQ(models, 9U);
}

TEST(Benchmark, DeterministicAndSparsity)
{
    BenchmarkOptions o;
    o.n_molecules = 120;
    o.seed = 4;
    const auto dir_a = fs::temp_directory_path() / "staug_bench_a";
    const auto dir_b = fs::temp_directory_path() / "staug_bench_b";
    write_benchmark(generate_benchmark(o), dir_a);
    write_benchmark(generate_benchmark(o), dir_b);
    for (const char* f : {"data.csv", "truth.csv", "tasks.json"}) {
        EXPECT_EQ(slurp(dir_a / f), slurp(dir_b / f)) << f;
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    o.sparsity = 0.0;
    const auto dense = generate_benchmark(o);
    EXPECT_TRUE((dense.observed.array() == 1).all());
    o.sparsity = 0.6;
    const auto sparse = generate_benchmark(o);
    const double frac = sparse.observed.cast<double>().mean();
    EXPECT_NEAR(frac, 0.4, 0.06);
    for (Eigen::Index r = 0; r < sparse.observed.rows(); ++r) {
        EXPECT_GT(sparse.observed.row(r).cast<int>().sum(), 0);
    }
    std::set<std::string> unique(sparse.smiles.begin(), sparse.smiles.end());
    EXPECT_EQ(unique.size(), sparse.smiles.size());
    for (const auto& s : sparse.smiles) {
        const auto g = chem::read_smiles(s);
        EXPECT_GE(g.heavy_atom_count(), 4);
        EXPECT_LE(g.heavy_atom_count(), 20);
        EXPECT_EQ(chem::canonicalize(s), s);
    }
    o.n_molecules = 99;
    EXPECT_THROW(generate_benchmark(o), PreconditionError);
}

TEST(Benchmark, NoiseFreeDescriptorTasksAreLearnable)
{
    const auto d = small_benchmark(2000, 0.0, 0.0, "descriptor");
    const auto x = prepare_features(d.mols, {}, 1);
    const auto plan = make_cv_plan(d.targets.n_rows(), {3}, 5);
    const auto teachers = train_teachers(x, d.targets, plan, 0, gbt::GbtParams{}, 1);
    const auto oof = combine_teacher_predictions(teachers.fold_predictions, plan.assignment[0], SyntheticMode::OutOfFold);
    for (Eigen::Index c = 0; c < oof.cols(); ++c) {
        std::vector<double> p(oof.col(c).data(), oof.col(c).data() + oof.rows());
        std::vector<double> t;
        for (Eigen::Index r = 0; r < oof.rows(); ++r) {
            t.push_back(d.targets.values(r, c));
            p[static_cast<std::size_t>(r)] = oof(r, c);
        }
        EXPECT_GT(report::compute_metrics(p, t).r2, 0.99) << "task " << c;
    }
}

TEST(RunAll, ManifestReplayIsByteIdentical)
{
    const auto dir = fs::temp_directory_path() / "staug_runall";
    fs::remove_all(dir);
    BenchmarkOptions o;
    o.n_molecules = 100;
    o.n_tasks = 3;
    o.seed = 8;
    write_benchmark(generate_benchmark(o), dir / "bench");

    RunManifest m;
    m.sources = {(dir / "bench" / "data.csv").string()};
    m.config = tiny_config();
    run_all(m, dir / "run1");
    const auto replay = load_manifest(dir / "run1" / "manifest.json");
    EXPECT_FALSE(replay.dataset_hash.empty());
    run_all(replay, dir / "run2");

    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "run1")) {
        if (!e.is_regular_file()) {
            continue;
        }
        const auto rel = fs::relative(e.path(), dir / "run1");
        ASSERT_TRUE(fs::exists(dir / "run2" / rel)) << rel;
        EXPECT_EQ(slurp(e.path()), slurp(dir / "run2" / rel)) << rel;
        ++compared;
    }
    EXPECT_GT(compared, 20U);
    for (const char* f : {"metrics_xgb.csv", "metrics_gt_naive.csv", "metrics_gt_sta.csv", "metrics_gt_sta_oof.csv",
                          "compare_gt_naive_vs_gt_sta.svg", "summary.txt", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir / "run1" / f)) << f;
    }

    // a manifest pointing at changed data is refused
    auto tampered = replay;
    tampered.dataset_hash = "0000000000000000";
    EXPECT_THROW(run_all(tampered, dir / "run3"), PreconditionError);
    fs::remove_all(dir);
}
