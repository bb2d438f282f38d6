#include "staug/gt/grad_check.hpp"
#include "staug/gt/model.hpp"

#include "staug/common/error.hpp"
#include "staug/common/numfmt.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace staug::gt {

namespace {

struct BatchData {
    GraphBatch batch;
    Mat targets;
    MaskMat observed;
};

BatchData gather(const GtData& data, const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end)
{
    BatchData b;
    std::vector<const GraphSample*> graphs;
    b.targets.resize(static_cast<Eigen::Index>(end - begin), data.targets.cols());
    b.observed.resize(static_cast<Eigen::Index>(end - begin), data.observed.cols());
    for (std::size_t k = begin; k < end; ++k) {
        const auto r = static_cast<Eigen::Index>(idx[k]);
        graphs.push_back(data.graphs[idx[k]]);
        b.targets.row(static_cast<Eigen::Index>(k - begin)) = data.targets.row(r);
        b.observed.row(static_cast<Eigen::Index>(k - begin)) = data.observed.row(r);
    }
    b.batch = make_batch(graphs);
    return b;
}

void check_data(const GtData& d, int n_tasks, const char* what)
{
    const auto n = static_cast<Eigen::Index>(d.graphs.size());
    if (d.targets.rows() != n || d.observed.rows() != n || d.targets.cols() != n_tasks
        || d.observed.cols() != n_tasks) {
        throw DimensionMismatch(std::string(what) + " targets do not match graphs and task count");
    }
}

Eigen::VectorXd or_ones(const Eigen::VectorXd& w, int n)
{
    if (w.size() == 0) {
        return Eigen::VectorXd::Ones(n);
    }
    if (w.size() != n) {
        throw DimensionMismatch("task weight length");
    }
    return w;
}

} // namespace

double evaluate_loss(GtModel& model, const GtData& data, const Eigen::VectorXd& task_weight, int batch_size)
{
    check_data(data, model.config().n_tasks, "evaluation");
    const Eigen::VectorXd w = or_ones(task_weight, model.config().n_tasks);
    std::vector<std::size_t> idx(data.graphs.size());
    std::iota(idx.begin(), idx.end(), 0);
    double sum = 0.0;
    double mass = 0.0;
    for (std::size_t b = 0; b < idx.size(); b += static_cast<std::size_t>(batch_size)) {
        const auto bd = gather(data, idx, b, std::min(idx.size(), b + static_cast<std::size_t>(batch_size)));
        const Mat pred = gt_forward(model, bd.batch);
        for (Eigen::Index i = 0; i < pred.rows(); ++i) {
            for (Eigen::Index t = 0; t < pred.cols(); ++t) {
                if (bd.observed(i, t) != 0) {
                    const double e = pred(i, t) - bd.targets(i, t);
                    sum += w(t) * e * e;
                    mass += w(t);
                }
            }
        }
    }
    if (!(mass > 0.0)) {
        throw EmptyBatch("evaluation set has no observed entries");
    }
    return sum / mass;
}

Mat predict(GtModel& model, const std::vector<const GraphSample*>& graphs, int batch_size)
{
    Mat out(static_cast<Eigen::Index>(graphs.size()), model.config().n_tasks);
    for (std::size_t b = 0; b < graphs.size(); b += static_cast<std::size_t>(batch_size)) {
        const std::size_t e = std::min(graphs.size(), b + static_cast<std::size_t>(batch_size));
        std::vector<const GraphSample*> part(graphs.begin() + static_cast<std::ptrdiff_t>(b),
                                             graphs.begin() + static_cast<std::ptrdiff_t>(e));
        out.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b)) = gt_forward(model, make_batch(part));
    }
    return out;
}

TrainResult train_gt(const GtConfig& config, const GtData& train, const GtData& val, const TrainOptions& opts)
{
    config.validate();
    check_data(train, config.n_tasks, "training");
    check_data(val, config.n_tasks, "validation");
    if (train.graphs.empty() || val.graphs.empty()) {
        throw PreconditionError("training and validation sets must be non-empty");
    }
    const Eigen::VectorXd w = or_ones(opts.task_weight, config.n_tasks);
    const Eigen::VectorXd vw = opts.val_task_weight.size() == 0 ? w : or_ones(opts.val_task_weight, config.n_tasks);

    TrainResult res{GtModel(config), {}};
    GtModel& model = res.model;
    Adam adam(config.lr, config.beta1, config.beta2, config.eps);
    Rng shuffle_rng(derive_seed(config.seed, {0x73687566}));
    Rng dropout_rng(derive_seed(config.seed, {0x64726f70}));
    EarlyStopping stopper(config.patience);
    std::vector<Mat> best;
    for (const auto& p : model.params()) {
        best.push_back(p.value);
    }

    std::vector<std::size_t> order(train.graphs.size());
    std::iota(order.begin(), order.end(), 0);
    const auto bs = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double sum = 0.0;
        double mass = 0.0;
        for (std::size_t b = 0; b < order.size(); b += bs) {
            const auto bd = gather(train, order, b, std::min(order.size(), b + bs));
            if ((bd.observed.array() != 0).count() == 0) {
                continue;
            }
            model.zero_grad();
            Tape tape;
            const int out = model.forward(tape, bd.batch, true, &dropout_rng);
            const auto loss = masked_multitask_loss(tape.value(out), bd.targets, bd.observed, w);
            if (!std::isfinite(loss.loss)) {
                throw NonFiniteLoss("training loss " + std::to_string(loss.loss) + " at epoch " + std::to_string(epoch)
                                    + ", batch starting at " + std::to_string(b));
            }
            tape.backward(out, loss.grad);
            adam.step(model.params());
            sum += loss.loss * loss.weight;
            mass += loss.weight;
        }
        const double val_loss = evaluate_loss(model, val, vw, config.batch_size);
        if (!std::isfinite(val_loss)) {
            throw NonFiniteLoss("validation loss " + std::to_string(val_loss) + " at epoch " + std::to_string(epoch));
        }
        res.log.epochs.push_back({epoch, mass > 0.0 ? sum / mass : 0.0, val_loss});
        if (stopper.update(epoch, val_loss)) {
            for (std::size_t i = 0; i < best.size(); ++i) {
                best[i] = model.params()[i].value;
            }
        }
        if (stopper.should_stop()) {
            res.log.stop_reason = "patience";
            break;
        }
    }
    if (res.log.stop_reason.empty()) {
        res.log.stop_reason = "max_epochs";
    }
    res.log.best_epoch = stopper.best_epoch();
    for (std::size_t i = 0; i < best.size(); ++i) {
        model.params()[i].value = best[i];
    }
    model.zero_grad();
    return res;
}

void write_training_log(const std::filesystem::path& path, const TrainingLog& log)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "epoch,train_loss,val_loss\n";
    for (const auto& e : log.epochs) {
        out << e.epoch << ',' << format_exact(e.train_loss) << ',' << format_exact(e.val_loss) << '\n';
    }
}

std::string config_to_json(const GtConfig& c)
{
    nlohmann::json j{{"layers", c.layers},   {"heads", c.heads},           {"hidden_dim", c.hidden_dim},
                     {"head_hidden", c.head_hidden}, {"n_tasks", c.n_tasks}, {"input_dim", c.input_dim},
                     {"dropout", c.dropout}, {"lr", c.lr},                 {"beta1", c.beta1},
                     {"beta2", c.beta2},     {"eps", c.eps},               {"max_epochs", c.max_epochs},
                     {"patience", c.patience}, {"batch_size", c.batch_size}, {"seed", c.seed}};
    return j.dump();
}

GtConfig config_from_json(const std::string& text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        GtConfig c;
        c.layers = j.value("layers", c.layers);
        c.heads = j.value("heads", c.heads);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.head_hidden = j.value("head_hidden", c.head_hidden);
        c.n_tasks = j.value("n_tasks", c.n_tasks);
        c.input_dim = j.value("input_dim", c.input_dim);
        c.dropout = j.value("dropout", c.dropout);
        c.lr = j.value("lr", c.lr);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.eps = j.value("eps", c.eps);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.patience = j.value("patience", c.patience);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("graph transformer config: ") + e.what());
    }
}

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'T', 'A', 'U', 'G', 'G', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& in)
{
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) {
        throw FormatError("truncated checkpoint");
    }
    return v;
}

std::string read_string(std::istream& in)
{
    const auto n = read_u64(in);
    if (n > (1U << 20)) {
        throw FormatError("corrupt checkpoint string");
    }
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const GtModel& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    const auto cfg = config_to_json(model.config());
    write_u64(out, cfg.size());
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    write_u64(out, model.params().size());
    for (const auto& p : model.params()) {
        write_u64(out, p.name.size());
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_u64(out, static_cast<std::uint64_t>(p.value.rows()));
        write_u64(out, static_cast<std::uint64_t>(p.value.cols()));
        out.write(reinterpret_cast<const char*>(p.value.data()),
                  static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double))));
    }
}

GtModel load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    char magic[sizeof kCheckpointMagic] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
        throw FormatError("not a graph transformer checkpoint: " + path.string());
    }
    GtModel model(config_from_json(read_string(in)));
    const auto n = read_u64(in);
    if (n != model.params().size()) {
        throw FormatError("checkpoint tensor count does not match its config");
    }
    for (auto& p : model.params()) {
        const auto name = read_string(in);
        const auto rows = read_u64(in);
        const auto cols = read_u64(in);
        if (name != p.name || static_cast<Eigen::Index>(rows) != p.value.rows()
            || static_cast<Eigen::Index>(cols) != p.value.cols()) {
            throw FormatError("checkpoint tensor " + name + " does not match its config");
        }
        in.read(reinterpret_cast<char*>(p.value.data()),
                static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double))));
        if (!in) {
            throw FormatError("truncated checkpoint");
        }
    }
    return model;
}

double relative_error(double analytic, double numeric)
{
    return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
}

GradCheckResult grad_check_params(std::vector<Parameter>& params, const std::function<double()>& loss,
                                  const std::function<void()>& backward, const GradCheckOptions& opts)
{
    for (auto& p : params) {
        p.grad.setZero();
    }
    backward();
    if (opts.corrupt) {
        opts.corrupt(params);
    }
    std::vector<Mat> analytic;
    for (const auto& p : params) {
        analytic.push_back(p.grad);
    }

    GradCheckResult res;
    Rng rng(opts.seed);
    const int per_tensor = std::max(1, (opts.min_coordinates + static_cast<int>(params.size()) - 1)
                                           / std::max(1, static_cast<int>(params.size())));
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto& p = params[t];
        const auto size = static_cast<std::uint64_t>(p.value.size());
        if (size == 0) {
            continue;
        }
        ++res.tensors;
        // every coordinate when the tensor is small, else a random sample
        std::vector<std::uint64_t> coords;
        if (size <= static_cast<std::uint64_t>(per_tensor)) {
            for (std::uint64_t i = 0; i < size; ++i) {
                coords.push_back(i);
            }
        } else {
            for (int k = 0; k < per_tensor; ++k) {
                coords.push_back(rng.index(size));
            }
        }
        for (auto c : coords) {
            double& x = p.value.data()[c];
            const double saved = x;
            x = saved + opts.epsilon;
            const double up = loss();
            x = saved - opts.epsilon;
            const double down = loss();
            x = saved;
            const double numeric = (up - down) / (2.0 * opts.epsilon);
            const double err = relative_error(analytic[t].data()[c], numeric);
            ++res.coordinates;
            if (err > res.max_rel_error || res.worst.empty()) {
                res.max_rel_error = err;
                res.worst = p.name + "[" + std::to_string(c) + "]";
            }
        }
    }
    return res;
}

GradCheckResult grad_check(GtModel& model, const GraphBatch& batch, const Mat& target, const MaskMat& observed,
                           const Eigen::VectorXd& task_weight, const GradCheckOptions& opts)
{
    auto loss = [&] {
        return masked_multitask_loss(gt_forward(model, batch), target, observed, task_weight).loss;
    };
    auto backward = [&] {
        Tape tape;
        const int out = model.forward(tape, batch, false, nullptr);
        const auto l = masked_multitask_loss(tape.value(out), target, observed, task_weight);
        tape.backward(out, l.grad);
    };
    return grad_check_params(model.params(), loss, backward, opts);
}

} // namespace staug::gt
