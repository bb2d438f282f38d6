#pragma once

#include "staug/chem/mol_graph.hpp"
#include "staug/gt/autograd.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace staug::gt {

using MaskMat = Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Node features per heavy atom:
//   [0, 13)  element one-hot: H B C N O F Si P S Cl Br I, other
//   [13, 19) heavy degree 0..5 (clamped)
//   [19, 24) attached hydrogens 0..4 (clamped)
//   [24, 29) formal charge -2..+2 (clamped)
//   29       aromatic
//   30       ring member
inline constexpr int kNodeFeatures = 31;

struct GraphSample {
    Mat features;                        // heavy atoms x kNodeFeatures
    std::vector<std::vector<int>> adjacency; // heavy-atom neighbours, no self loop
};

GraphSample featurize_graph(const chem::MolGraph& g);

struct GraphBatch {
    Mat node_features;
    std::vector<int> graph_offsets; // size B + 1
    Csr neighbors;                  // includes self loops

    int size() const { return static_cast<int>(graph_offsets.size()) - 1; }
};

GraphBatch make_batch(const std::vector<const GraphSample*>& graphs);

struct GtConfig {
    int layers = 4;
    int heads = 4;
    int hidden_dim = 128;
    int head_hidden = 64;
    int n_tasks = 1;
    int input_dim = kNodeFeatures;
    double dropout = 0.1;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int max_epochs = 450;
    int patience = 20;
    int batch_size = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

class GtModel {
public:
    GtModel() = default;
    // Seeded initialisation. Parameters are drawn in a fixed order with the
    // final projection last, so models differing only in n_tasks share every
    // other tensor bit for bit.
    explicit GtModel(const GtConfig& config);

    const GtConfig& config() const { return config_; }
    std::vector<Parameter>& params() { return params_; }
    const std::vector<Parameter>& params() const { return params_; }
    Parameter& param(const std::string& name);
    const Parameter& param(const std::string& name) const;
    std::size_t parameter_count() const;
    // Names of the final projection tensors.
    static bool is_head_projection(const std::string& name);

    void zero_grad();

    // Builds the forward graph on `tape`; returns the id of the B x T output.
    // With train = false dropout is off and `rng` may be null.
    int forward(Tape& tape, const GraphBatch& batch, bool train, Rng* rng);

private:
    Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);

    GtConfig config_;
    std::vector<Parameter> params_;
};

// Eval-mode predictions (B x T, standardised space).
Mat gt_forward(GtModel& model, const GraphBatch& batch);

struct LossResult {
    double loss = 0.0;
    double weight = 0.0; // observed weight mass
    Mat grad; // d loss / d pred
};

// Weighted mean squared error over observed entries. Throws EmptyBatch when
// the observed weight mass is zero.
LossResult masked_multitask_loss(const Mat& pred, const Mat& target, const MaskMat& observed,
                                 const Eigen::VectorXd& task_weight);

class TaskStandardizer {
public:
    TaskStandardizer() = default;
    // Mean and population std per task over observed entries. Tasks with
    // fewer than 2 observations or zero spread fall back to std 1.
    static TaskStandardizer fit(const Mat& values, const MaskMat& observed);

    Mat transform(const Mat& values) const;
    Mat inverse(const Mat& values) const;
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& stddev() const { return std_; }

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd std_;
};

class Adam {
public:
    Adam(double lr, double beta1, double beta2, double eps) : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}
    void step(std::vector<Parameter>& params);
    long steps() const { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<Mat> m_, v_;
};

// Patience counter over 1-based epochs. An epoch improves only when its
// value is strictly below the best so far.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}
    // Returns true if this epoch is the new best.
    bool update(int epoch, double value);
    bool should_stop() const { return bad_epochs_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_value() const { return best_; }

private:
    int patience_;
    int bad_epochs_ = 0;
    int best_epoch_ = 0;
    double best_ = INFINITY;
};

struct GtData {
    std::vector<const GraphSample*> graphs;
    Mat targets; // rows x T, standardised; unobserved entries ignored
    MaskMat observed;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    std::string stop_reason;
};

struct TrainOptions {
    // Loss weight per task; empty means all ones.
    Eigen::VectorXd task_weight;
    // Weight per task in the validation loss; empty means task_weight.
    Eigen::VectorXd val_task_weight;
};

struct TrainResult {
    GtModel model;
    TrainingLog log;
};

TrainResult train_gt(const GtConfig& config, const GtData& train, const GtData& val, const TrainOptions& opts = {});

// Weighted masked loss of the model over a whole data set, in eval mode.
double evaluate_loss(GtModel& model, const GtData& data, const Eigen::VectorXd& task_weight, int batch_size);
// Eval-mode predictions for every graph, in order (standardised space).
Mat predict(GtModel& model, const std::vector<const GraphSample*>& graphs, int batch_size);

void write_training_log(const std::filesystem::path& path, const TrainingLog& log);

std::string config_to_json(const GtConfig& c);
GtConfig config_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const GtModel& model);
GtModel load_checkpoint(const std::filesystem::path& path);

} // namespace staug::gt
