#include "staug/gbt/gbt.hpp"

#include "staug/common/error.hpp"
#include "staug/common/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace staug::gbt {

using desc::FeatureMatrix;

void GbtParams::validate() const
{
    if (n_rounds < 0 || max_depth < 1) {
        throw PreconditionError("n_rounds must be >= 0 and max_depth >= 1");
    }
    if (!(learning_rate > 0.0) || lambda < 0.0 || gamma < 0.0 || min_child_weight < 0.0) {
        throw PreconditionError("invalid boosting regularisation parameters");
    }
    if (!(subsample > 0.0 && subsample <= 1.0) || !(colsample > 0.0 && colsample <= 1.0)) {
        throw PreconditionError("subsample and colsample must lie in (0, 1]");
    }
}

double Tree::evaluate(const double* row) const
{
    int k = 0;
    while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(k)];
        const double v = row[n.feature];
        if (std::isnan(v)) {
            k = n.default_left ? n.left : n.right;
        } else {
            k = v < n.threshold ? n.left : n.right;
        }
    }
    return nodes[static_cast<std::size_t>(k)].leaf_value;
}

double GbtModel::predict_row(const double* row) const
{
    double s = 0.0;
    for (const auto& t : trees) {
        s += t.evaluate(row);
    }
    return base_score + learning_rate * s;
}

namespace {

struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool default_left = false;
};

struct NodeState {
    int node = 0; // index into tree.nodes
    double g = 0.0;
    double h = 0.0;
    Split best;
    // per-feature scan state
    double gl = 0.0;
    double hl = 0.0;
    double last = 0.0;
    bool seen = false;
    double g_missing = 0.0;
    double h_missing = 0.0;
};

double score(double g, double h, double lambda) { return g * g / (h + lambda); }

class Builder {
public:
    Builder(const FeatureMatrix& x, std::vector<std::size_t> rows, const GbtParams& p)
        : x_(x), rows_(std::move(rows)), p_(p)
    {
        // presort observed values of each feature once per fit
        sorted_.resize(x.cols);
        missing_.resize(x.cols);
        for (std::size_t f = 0; f < x.cols; ++f) {
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                const double v = x.at(rows_[i], f);
                (std::isnan(v) ? missing_[f] : sorted_[f]).push_back(i);
            }
            std::stable_sort(sorted_[f].begin(), sorted_[f].end(), [&](std::size_t a, std::size_t b) {
                return x.at(rows_[a], f) < x.at(rows_[b], f);
            });
        }
    }

    // Grows one tree on the gradients of the sampled rows.
    Tree grow(const std::vector<double>& grad, const std::vector<bool>& in_sample, const std::vector<int>& features)
    {
        Tree tree;
        const std::size_t n = rows_.size();
        std::vector<int> slot(n, -1); // index into `active` for the row's node
        std::vector<NodeState> active(1);
        tree.nodes.emplace_back();
        for (std::size_t i = 0; i < n; ++i) {
            if (in_sample[i]) {
                slot[i] = 0;
                active[0].g += grad[i];
                active[0].h += 1.0;
            }
        }
        for (int depth = 0; depth < p_.max_depth && !active.empty(); ++depth) {
            for (int f : features) {
                scan_feature(f, grad, slot, active);
            }
            std::vector<NodeState> next;
            std::vector<int> remap_left(active.size(), -1);
            std::vector<int> remap_right(active.size(), -1);
            for (std::size_t k = 0; k < active.size(); ++k) {
                auto& st = active[k];
                if (st.best.feature < 0) {
                    set_leaf(tree, st);
                    continue;
                }
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& node = tree.nodes[static_cast<std::size_t>(st.node)];
                node.feature = st.best.feature;
                node.threshold = st.best.threshold;
                node.default_left = st.best.default_left;
                node.left = left;
                node.right = left + 1;
                remap_left[k] = static_cast<int>(next.size());
                next.emplace_back();
                next.back().node = left;
                remap_right[k] = static_cast<int>(next.size());
                next.emplace_back();
                next.back().node = left + 1;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (slot[i] < 0) {
                    continue;
                }
                const auto k = static_cast<std::size_t>(slot[i]);
                if (remap_left[k] < 0) {
                    slot[i] = -1;
                    continue;
                }
                const auto& node = tree.nodes[static_cast<std::size_t>(active[k].node)];
                const double v = x_.at(rows_[i], static_cast<std::size_t>(node.feature));
                const bool left = std::isnan(v) ? node.default_left : v < node.threshold;
                slot[i] = left ? remap_left[k] : remap_right[k];
                auto& child = next[static_cast<std::size_t>(slot[i])];
                child.g += grad[i];
                child.h += 1.0;
            }
            active = std::move(next);
        }
        for (auto& st : active) {
            set_leaf(tree, st);
        }
        return tree;
    }

    std::size_t size() const { return rows_.size(); }
    std::size_t row(std::size_t i) const { return rows_[i]; }

private:
    void set_leaf(Tree& tree, const NodeState& st) const
    {
        tree.nodes[static_cast<std::size_t>(st.node)].leaf_value = st.h + p_.lambda > 0.0 ? -st.g / (st.h + p_.lambda) : 0.0;
    }

    void consider(NodeState& st, int f, double threshold) const
    {
        const double parent = score(st.g, st.h, p_.lambda);
        // default right first, so an exact tie keeps missing values right
        for (int dir = 0; dir < 2; ++dir) {
            const bool left_default = dir == 1;
            const double gl = st.gl + (left_default ? st.g_missing : 0.0);
            const double hl = st.hl + (left_default ? st.h_missing : 0.0);
            const double gr = st.g - gl;
            const double hr = st.h - hl;
            if (hl < p_.min_child_weight || hr < p_.min_child_weight || hl <= 0.0 || hr <= 0.0) {
                continue;
            }
            const double gain = 0.5 * (score(gl, hl, p_.lambda) + score(gr, hr, p_.lambda) - parent) - p_.gamma;
            if (gain > 0.0 && gain > st.best.gain) {
                st.best = Split{gain, f, threshold, left_default};
            }
        }
    }

    void scan_feature(int f, const std::vector<double>& grad, const std::vector<int>& slot,
                      std::vector<NodeState>& active) const
    {
        for (auto& st : active) {
            st.gl = st.hl = 0.0;
            st.seen = false;
            st.g_missing = st.h_missing = 0.0;
        }
        const auto fi = static_cast<std::size_t>(f);
        for (std::size_t i : missing_[fi]) {
            if (slot[i] >= 0) {
                auto& st = active[static_cast<std::size_t>(slot[i])];
                st.g_missing += grad[i];
                st.h_missing += 1.0;
            }
        }
        for (std::size_t i : sorted_[fi]) {
            if (slot[i] < 0) {
                continue;
            }
            auto& st = active[static_cast<std::size_t>(slot[i])];
            const double v = x_.at(rows_[i], fi);
            if (st.seen && v > st.last) {
                double t = st.last + (v - st.last) / 2.0;
                if (!(t > st.last)) {
                    t = v; // adjacent doubles: the midpoint rounded down
                }
                consider(st, f, t);
            }
            st.gl += grad[i];
            st.hl += 1.0;
            st.last = v;
            st.seen = true;
        }
    }

    const FeatureMatrix& x_;
    std::vector<std::size_t> rows_;
    const GbtParams& p_;
    std::vector<std::vector<std::size_t>> sorted_;
    std::vector<std::vector<std::size_t>> missing_;
};

} // namespace

GbtModel fit_gbt(const FeatureMatrix& x, std::span<const double> y, const GbtParams& params,
                 const RoundCallback& on_round)
{
    params.validate();
    if (y.size() != x.rows || x.data.size() != x.rows * x.cols) {
        throw DimensionMismatch("target length " + std::to_string(y.size()) + " vs " + std::to_string(x.rows) + " rows");
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < y.size(); ++r) {
        if (!std::isnan(y[r])) {
            rows.push_back(r);
        }
    }
    if (rows.size() < 2) {
        throw TooFewRows("gradient boosting needs at least 2 observed targets");
    }

    GbtModel model;
    model.params = params;
    model.learning_rate = params.learning_rate;
    model.n_features = x.cols;
    double sum = 0.0;
    for (std::size_t r : rows) {
        sum += y[r];
    }
    model.base_score = sum / static_cast<double>(rows.size());
    const bool constant = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y[r] == y[rows[0]]; });
    if (constant) {
        model.base_score = y[rows[0]];
        model.degenerate = true;
        return model;
    }

    Builder builder(x, rows, params);
    const std::size_t n = rows.size();
    std::vector<double> pred(n, model.base_score);
    std::vector<double> grad(n);
    std::vector<bool> in_sample(n);
    std::vector<int> all_features(x.cols);
    std::iota(all_features.begin(), all_features.end(), 0);
    Rng rng(params.seed);

    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = pred[i] - y[rows[i]];
        }
        std::size_t sampled = 0;
        for (std::size_t i = 0; i < n; ++i) {
            in_sample[i] = params.subsample >= 1.0 || rng.uniform() < params.subsample;
            sampled += in_sample[i] ? 1 : 0;
        }
        if (sampled == 0) {
            in_sample[rng.index(n)] = true;
        }
        std::vector<int> features = all_features;
        if (params.colsample < 1.0) {
            rng.shuffle(std::span<int>(features));
            const auto keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(params.colsample * static_cast<double>(x.cols))));
            features.resize(std::min(keep, features.size()));
            std::sort(features.begin(), features.end());
        }
        Tree tree = builder.grow(grad, in_sample, features);
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &x.data[builder.row(i) * x.cols];
            pred[i] += params.learning_rate * tree.evaluate(row);
            const double e = pred[i] - y[rows[i]];
            sse += e * e;
        }
        model.trees.push_back(std::move(tree));
        if (on_round) {
            on_round(round, std::sqrt(sse / static_cast<double>(n)));
        }
    }
    return model;
}

std::vector<double> predict_gbt(const GbtModel& m, const FeatureMatrix& x)
{
    if (x.cols != m.n_features) {
        throw DimensionMismatch("model expects " + std::to_string(m.n_features) + " features, got "
                                + std::to_string(x.cols));
    }
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        out[r] = m.predict_row(&x.data[r * x.cols]);
    }
    return out;
}

namespace {

constexpr int kFormatVersion = 1;

// Trees as nested arrays: a leaf is [value], a split is
// [feature, threshold, default_left, left, right].
nlohmann::json node_json(const Tree& t, int k)
{
    const auto& n = t.nodes[static_cast<std::size_t>(k)];
    if (n.is_leaf()) {
        return nlohmann::json::array({n.leaf_value});
    }
    return nlohmann::json::array({n.feature, n.threshold, n.default_left, node_json(t, n.left), node_json(t, n.right)});
}

int node_from_json(const nlohmann::json& j, Tree& t)
{
    const int k = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    if (j.size() == 1) {
        t.nodes.back().leaf_value = j[0].get<double>();
        return k;
    }
    if (j.size() != 5) {
        throw FormatError("malformed tree node");
    }
    TreeNode n;
    n.feature = j[0].get<int>();
    n.threshold = j[1].get<double>();
    n.default_left = j[2].get<bool>();
    n.left = node_from_json(j[3], t);
    n.right = node_from_json(j[4], t);
    t.nodes[static_cast<std::size_t>(k)] = n;
    return k;
}

} // namespace

std::string model_to_json(const GbtModel& m)
{
    nlohmann::json j;
    j["format"] = "staug-gbt";
    j["version"] = kFormatVersion;
    j["base_score"] = m.base_score;
    j["learning_rate"] = m.learning_rate;
    j["n_features"] = m.n_features;
    j["degenerate"] = m.degenerate;
    j["params"] = {{"n_rounds", m.params.n_rounds},
                   {"max_depth", m.params.max_depth},
                   {"learning_rate", m.params.learning_rate},
                   {"lambda", m.params.lambda},
                   {"gamma", m.params.gamma},
                   {"min_child_weight", m.params.min_child_weight},
                   {"subsample", m.params.subsample},
                   {"colsample", m.params.colsample},
                   {"seed", m.params.seed}};
    auto trees = nlohmann::json::array();
    for (const auto& t : m.trees) {
        trees.push_back(node_json(t, 0));
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

GbtModel model_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("gbt model: ") + e.what());
    }
    if (j.value("format", "") != "staug-gbt" || j.value("version", 0) != kFormatVersion) {
        throw FormatError("not a staug-gbt model of a supported version");
    }
    try {
        GbtModel m;
        m.base_score = j.at("base_score").get<double>();
        m.learning_rate = j.at("learning_rate").get<double>();
        m.n_features = j.at("n_features").get<std::size_t>();
        m.degenerate = j.at("degenerate").get<bool>();
        const auto& p = j.at("params");
        m.params.n_rounds = p.at("n_rounds").get<int>();
        m.params.max_depth = p.at("max_depth").get<int>();
        m.params.learning_rate = p.at("learning_rate").get<double>();
        m.params.lambda = p.at("lambda").get<double>();
        m.params.gamma = p.at("gamma").get<double>();
        m.params.min_child_weight = p.at("min_child_weight").get<double>();
        m.params.subsample = p.at("subsample").get<double>();
        m.params.colsample = p.at("colsample").get<double>();
        m.params.seed = p.at("seed").get<std::uint64_t>();
        for (const auto& tj : j.at("trees")) {
            Tree t;
            node_from_json(tj, t);
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("gbt model: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const GbtModel& m)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << model_to_json(m);
}

GbtModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

} // namespace staug::gbt
