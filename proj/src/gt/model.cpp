#include "staug/gt/model.hpp"

#include "staug/chem/element.hpp"
#include "staug/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace staug::gt {

namespace elem = chem::elem;

namespace {

int element_slot(int z)
{
    static constexpr int kOrder[] = {elem::H, elem::B, elem::C, elem::N, elem::O, elem::F,
                                     elem::Si, elem::P, elem::S, elem::Cl, elem::Br, elem::I};
    for (int i = 0; i < 12; ++i) {
        if (kOrder[i] == z) {
            return i;
        }
    }
    return 12;
}

} // namespace

GraphSample featurize_graph(const chem::MolGraph& g)
{
    std::vector<int> heavy_index(static_cast<std::size_t>(g.atom_count()), -1);
    int n = 0;
    for (int i = 0; i < g.atom_count(); ++i) {
        if (g.atom(i).element != elem::H) {
            heavy_index[static_cast<std::size_t>(i)] = n++;
        }
    }
    GraphSample s;
    s.features = Mat::Zero(n, kNodeFeatures);
    s.adjacency.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < g.atom_count(); ++i) {
        const int r = heavy_index[static_cast<std::size_t>(i)];
        if (r < 0) {
            continue;
        }
        const auto& a = g.atom(i);
        int degree = 0;
        int hydrogens = a.implicit_h;
        for (const auto& nb : g.neighbors(i)) {
            const int j = heavy_index[static_cast<std::size_t>(nb.atom)];
            if (j < 0) {
                ++hydrogens;
            } else {
                ++degree;
                s.adjacency[static_cast<std::size_t>(r)].push_back(j);
            }
        }
        std::sort(s.adjacency[static_cast<std::size_t>(r)].begin(), s.adjacency[static_cast<std::size_t>(r)].end());
        s.features(r, element_slot(a.element)) = 1.0;
        s.features(r, 13 + std::min(degree, 5)) = 1.0;
        s.features(r, 19 + std::min(hydrogens, 4)) = 1.0;
        s.features(r, 24 + std::clamp(a.formal_charge, -2, 2) + 2) = 1.0;
        s.features(r, 29) = a.aromatic ? 1.0 : 0.0;
        s.features(r, 30) = a.ring_member ? 1.0 : 0.0;
    }
    return s;
}

GraphBatch make_batch(const std::vector<const GraphSample*>& graphs)
{
    if (graphs.empty()) {
        throw EmptyBatch("no graphs in batch");
    }
    GraphBatch b;
    int total = 0;
    b.graph_offsets.push_back(0);
    for (const auto* g : graphs) {
        if (g->features.rows() == 0) {
            throw PreconditionError("graph without heavy atoms");
        }
        total += static_cast<int>(g->features.rows());
        b.graph_offsets.push_back(total);
    }
    b.node_features.resize(total, graphs.front()->features.cols());
    b.neighbors.offsets.reserve(static_cast<std::size_t>(total) + 1);
    b.neighbors.offsets.push_back(0);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const auto* g = graphs[k];
        const int base = b.graph_offsets[k];
        if (g->features.cols() != b.node_features.cols()) {
            throw DimensionMismatch("graphs with different feature widths in one batch");
        }
        b.node_features.middleRows(base, g->features.rows()) = g->features;
        for (Eigen::Index i = 0; i < g->features.rows(); ++i) {
            // self loop merged into the sorted neighbour order
            std::vector<int> row = g->adjacency[static_cast<std::size_t>(i)];
            row.insert(std::upper_bound(row.begin(), row.end(), static_cast<int>(i)), static_cast<int>(i));
            for (int j : row) {
                if (j < 0 || j >= g->features.rows()) {
                    throw PreconditionError("neighbour index outside its molecule");
                }
                b.neighbors.index.push_back(base + j);
            }
            b.neighbors.offsets.push_back(static_cast<int>(b.neighbors.index.size()));
        }
    }
    return b;
}

void GtConfig::validate() const
{
    if (layers < 0 || heads < 1 || hidden_dim < 1 || head_hidden < 1 || n_tasks < 1 || input_dim < 1) {
        throw PreconditionError("graph transformer dimensions must be positive");
    }
    if (hidden_dim % heads != 0) {
        throw PreconditionError("hidden_dim must be divisible by heads");
    }
    if (dropout < 0.0 || dropout >= 1.0) {
        throw PreconditionError("dropout must lie in [0, 1)");
    }
    if (!(lr > 0.0) || max_epochs < 1 || patience < 1 || batch_size < 1) {
        throw PreconditionError("invalid training schedule");
    }
}

Parameter& GtModel::add(const std::string& name, Eigen::Index rows, Eigen::Index cols)
{
    params_.push_back(Parameter{name, Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
    return params_.back();
}

GtModel::GtModel(const GtConfig& config) : config_(config)
{
    config.validate();
    const int h = config.hidden_dim;
    params_.reserve(static_cast<std::size_t>(6 + 13 * config.layers));
    Rng rng(derive_seed(config.seed, {0x696e6974}));
    auto weight = [&](const std::string& name, Eigen::Index in, Eigen::Index out) {
        auto& p = add(name, in, out);
        const double a = std::sqrt(6.0 / static_cast<double>(in + out));
        for (Eigen::Index i = 0; i < p.value.size(); ++i) {
            p.value.data()[i] = rng.uniform(-a, a);
        }
    };
    auto ones = [&](const std::string& name, Eigen::Index cols) { add(name, 1, cols).value.setOnes(); };
    auto zeros = [&](const std::string& name, Eigen::Index cols) { add(name, 1, cols); };

    weight("embed.w", config.input_dim, h);
    zeros("embed.b", h);
    for (int l = 0; l < config.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        weight(p + "wq", h, h);
        weight(p + "wk", h, h);
        weight(p + "wv", h, h);
        weight(p + "wo", h, h);
        zeros(p + "bo", h);
        ones(p + "ln1.g", h);
        zeros(p + "ln1.b", h);
        weight(p + "ff1.w", h, 2 * h);
        zeros(p + "ff1.b", 2 * h);
        weight(p + "ff2.w", 2 * h, h);
        zeros(p + "ff2.b", h);
        ones(p + "ln2.g", h);
        zeros(p + "ln2.b", h);
    }
    weight("head.w", h, config.head_hidden);
    zeros("head.b", config.head_hidden);
    // final projection: the only T-dependent tensors, drawn last
    weight("out.w", config.head_hidden, config.n_tasks);
    zeros("out.b", config.n_tasks);
}

bool GtModel::is_head_projection(const std::string& name) { return name == "out.w" || name == "out.b"; }

Parameter& GtModel::param(const std::string& name)
{
    for (auto& p : params_) {
        if (p.name == name) {
            return p;
        }
    }
    throw PreconditionError("no parameter named " + name);
}

const Parameter& GtModel::param(const std::string& name) const
{
    return const_cast<GtModel*>(this)->param(name);
}

std::size_t GtModel::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

void GtModel::zero_grad()
{
    for (auto& p : params_) {
        p.grad.setZero();
    }
}

int GtModel::forward(Tape& tape, const GraphBatch& batch, bool train, Rng* rng)
{
    if (batch.node_features.cols() != config_.input_dim) {
        throw DimensionMismatch("node feature width " + std::to_string(batch.node_features.cols()) + ", model expects "
                                + std::to_string(config_.input_dim));
    }
    const double p_drop = train ? config_.dropout : 0.0;
    if (p_drop > 0.0 && rng == nullptr) {
        throw PreconditionError("training forward pass needs a random stream");
    }
    auto P = [&](const std::string& name) { return tape.param(param(name)); };
    auto drop = [&](int x) { return p_drop > 0.0 ? tape.dropout(x, p_drop, *rng) : x; };

    int x = tape.constant(batch.node_features);
    x = tape.add_bias(tape.matmul(x, P("embed.w")), P("embed.b"));
    for (int l = 0; l < config_.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        const int q = tape.matmul(x, P(p + "wq"));
        const int k = tape.matmul(x, P(p + "wk"));
        const int v = tape.matmul(x, P(p + "wv"));
        const int att = tape.graph_attention(q, k, v, batch.neighbors, config_.heads);
        const int o = tape.add_bias(tape.matmul(att, P(p + "wo")), P(p + "bo"));
        x = tape.layer_norm(tape.add(x, drop(o)), P(p + "ln1.g"), P(p + "ln1.b"));
        const int f1 = tape.gelu(tape.add_bias(tape.matmul(x, P(p + "ff1.w")), P(p + "ff1.b")));
        const int f2 = tape.add_bias(tape.matmul(f1, P(p + "ff2.w")), P(p + "ff2.b"));
        x = tape.layer_norm(tape.add(x, drop(f2)), P(p + "ln2.g"), P(p + "ln2.b"));
    }
    int r = tape.segment_mean(x, batch.graph_offsets);
    r = drop(tape.gelu(tape.add_bias(tape.matmul(r, P("head.w")), P("head.b"))));
    return tape.add_bias(tape.matmul(r, P("out.w")), P("out.b"));
}

Mat gt_forward(GtModel& model, const GraphBatch& batch)
{
    Tape tape;
    const int out = model.forward(tape, batch, false, nullptr);
    return tape.value(out);
}

LossResult masked_multitask_loss(const Mat& pred, const Mat& target, const MaskMat& observed,
                                 const Eigen::VectorXd& task_weight)
{
    if (pred.rows() != target.rows() || pred.cols() != target.cols() || observed.rows() != pred.rows()
        || observed.cols() != pred.cols() || task_weight.size() != pred.cols()) {
        throw DimensionMismatch("loss inputs disagree in shape");
    }
    double mass = 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        for (Eigen::Index t = 0; t < pred.cols(); ++t) {
            if (observed(i, t) != 0) {
                const double e = pred(i, t) - target(i, t);
                mass += task_weight(t);
                sum += task_weight(t) * e * e;
            }
        }
    }
    if (!(mass > 0.0)) {
        throw EmptyBatch("no observed target entries in batch");
    }
    LossResult r;
    r.loss = sum / mass;
    r.weight = mass;
    r.grad = Mat::Zero(pred.rows(), pred.cols());
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        for (Eigen::Index t = 0; t < pred.cols(); ++t) {
            if (observed(i, t) != 0) {
                r.grad(i, t) = 2.0 * task_weight(t) * (pred(i, t) - target(i, t)) / mass;
            }
        }
    }
    return r;
}

TaskStandardizer TaskStandardizer::fit(const Mat& values, const MaskMat& observed)
{
    if (values.rows() != observed.rows() || values.cols() != observed.cols()) {
        throw DimensionMismatch("standardizer values and mask differ in shape");
    }
    TaskStandardizer s;
    const auto T = values.cols();
    s.mean_ = Eigen::VectorXd::Zero(T);
    s.std_ = Eigen::VectorXd::Ones(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        double sum = 0.0;
        long n = 0;
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            if (observed(i, t) != 0) {
                sum += values(i, t);
                ++n;
            }
        }
        if (n == 0) {
            continue;
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            if (observed(i, t) != 0) {
                ss += (values(i, t) - mean) * (values(i, t) - mean);
            }
        }
        s.mean_(t) = mean;
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (n >= 2 && sd > 0.0 && std::isfinite(sd)) {
            s.std_(t) = sd;
        }
    }
    return s;
}

Mat TaskStandardizer::transform(const Mat& values) const
{
    if (values.cols() != mean_.size()) {
        throw DimensionMismatch("standardizer task count");
    }
    return (values.rowwise() - mean_.transpose()).array().rowwise() / std_.transpose().array();
}

Mat TaskStandardizer::inverse(const Mat& values) const
{
    if (values.cols() != mean_.size()) {
        throw DimensionMismatch("standardizer task count");
    }
    return (values.array().rowwise() * std_.transpose().array()).matrix().rowwise() + mean_.transpose();
}

void Adam::step(std::vector<Parameter>& params)
{
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
            v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * p.grad;
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * p.grad.cwiseProduct(p.grad);
        p.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
}

bool EarlyStopping::update(int epoch, double value)
{
    if (value < best_) {
        best_ = value;
        best_epoch_ = epoch;
        bad_epochs_ = 0;
        return true;
    }
    ++bad_epochs_;
    return false;
}

} // namespace staug::gt
