#pragma once

#include "staug/common/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace staug::gt {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
    std::string name;
    Mat value;
    Mat grad; // same shape as value
};

// Per-node neighbour lists in CSR form; every node lists itself.
struct Csr {
    std::vector<int> offsets; // size n + 1
    std::vector<int> index;
};

// Reverse-mode tape. Each op records its output and a closure that pushes
// the output gradient back to its inputs. Values are addressed by id.
class Tape {
public:
    int param(Parameter& p);
    int constant(Mat m);

    int matmul(int a, int b);
    int add_bias(int a, int bias); // bias is 1 x cols, broadcast over rows
    int add(int a, int b);
    int gelu(int a);
    int layer_norm(int a, int gamma, int beta, double eps = 1e-5);
    // Inverted dropout; identity when p == 0.
    int dropout(int a, double p, Rng& rng);
    // Multi-head scaled dot-product attention restricted to each row's
    // neighbour list.
    int graph_attention(int q, int k, int v, const Csr& nbrs, int heads);
    // Row means over consecutive segments [offsets[s], offsets[s+1]).
    int segment_mean(int a, std::vector<int> offsets);

    const Mat& value(int id) const;
    // Seeds d(out)/d(root) and runs the tape backwards, accumulating into
    // Parameter::grad for every parameter leaf.
    void backward(int root, const Mat& seed);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        const Mat* external = nullptr; // parameter leaves alias their storage
        Parameter* param = nullptr;
        Mat grad;
        std::function<void(Tape&, int)> back;
    };

    int push(Mat value, std::function<void(Tape&, int)> back);
    Mat& grad(int id);
    Mat& own_grad(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::vector<Node> nodes_;
};

double gelu(double x);
double gelu_derivative(double x);

} // namespace staug::gt
