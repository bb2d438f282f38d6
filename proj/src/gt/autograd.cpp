#include "staug/gt/autograd.hpp"

#include "staug/common/error.hpp"

#include <cmath>

namespace staug::gt {

namespace {

constexpr double kGeluC = 0.7978845608028654; // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

void require(bool ok, const char* what)
{
    if (!ok) {
        throw DimensionMismatch(what);
    }
}

} // namespace

double gelu(double x)
{
    return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_derivative(double x)
{
    const double u = kGeluC * (x + kGeluA * x * x * x);
    const double t = std::tanh(u);
    const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

int Tape::push(Mat value, std::function<void(Tape&, int)> back)
{
    Node n;
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

const Mat& Tape::value(int id) const
{
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    return n.external != nullptr ? *n.external : n.value;
}

Mat& Tape::grad(int id)
{
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) {
        const auto& v = value(id);
        n.grad = Mat::Zero(v.rows(), v.cols());
    }
    return n.grad;
}

int Tape::param(Parameter& p)
{
    Node n;
    n.external = &p.value;
    n.param = &p;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::constant(Mat m) { return push(std::move(m), nullptr); }

int Tape::matmul(int a, int b)
{
    require(value(a).cols() == value(b).rows(), "matmul inner dimensions differ");
    Mat out = value(a) * value(b);
    return push(std::move(out), [a, b](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        t.grad(a).noalias() += g * t.value(b).transpose();
        t.grad(b).noalias() += t.value(a).transpose() * g;
    });
}

int Tape::add_bias(int a, int bias)
{
    require(value(bias).rows() == 1 && value(bias).cols() == value(a).cols(), "bias shape");
    Mat out = value(a).rowwise() + value(bias).row(0);
    return push(std::move(out), [a, bias](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        t.grad(a) += g;
        t.grad(bias) += g.colwise().sum();
    });
}

int Tape::add(int a, int b)
{
    require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "add shapes differ");
    Mat out = value(a) + value(b);
    return push(std::move(out), [a, b](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        t.grad(a) += g;
        t.grad(b) += g;
    });
}

int Tape::gelu(int a)
{
    Mat out = value(a).unaryExpr([](double x) { return gt::gelu(x); });
    return push(std::move(out), [a](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        t.grad(a) += g.cwiseProduct(t.value(a).unaryExpr([](double x) { return gelu_derivative(x); }));
    });
}

int Tape::layer_norm(int a, int gamma, int beta, double eps)
{
    const Mat& x = value(a);
    const auto d = x.cols();
    require(value(gamma).rows() == 1 && value(gamma).cols() == d, "layer norm gamma shape");
    require(value(beta).rows() == 1 && value(beta).cols() == d, "layer norm beta shape");
    Mat xhat(x.rows(), d);
    Eigen::VectorXd inv_std(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = (x.row(r).array() - mean) * inv_std(r);
    }
    Mat out = (xhat.array().rowwise() * value(gamma).row(0).array()).rowwise() + value(beta).row(0).array();
    return push(std::move(out), [a, gamma, beta, xhat, inv_std](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        t.grad(beta) += g.colwise().sum();
        t.grad(gamma) += g.cwiseProduct(xhat).colwise().sum();
        const Mat gx = g.array().rowwise() * t.value(gamma).row(0).array();
        Mat& ga = t.grad(a);
        const double d = static_cast<double>(xhat.cols());
        for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
            const double m1 = gx.row(r).sum() / d;
            const double m2 = gx.row(r).dot(xhat.row(r)) / d;
            ga.row(r).array() += inv_std(r) * (gx.row(r).array() - m1 - xhat.row(r).array() * m2);
        }
    });
}

int Tape::dropout(int a, double p, Rng& rng)
{
    if (p <= 0.0) {
        return a;
    }
    const Mat& x = value(a);
    Mat mask(x.rows(), x.cols());
    const double keep = 1.0 - p;
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    }
    Mat out = x.cwiseProduct(mask);
    return push(std::move(out), [a, mask](Tape& t, int self) { t.grad(a) += t.own_grad(self).cwiseProduct(mask); });
}

int Tape::graph_attention(int q, int k, int v, const Csr& nbrs, int heads)
{
    const Mat& Q = value(q);
    const Mat& K = value(k);
    const Mat& V = value(v);
    const auto n = Q.rows();
    const auto d = Q.cols();
    require(K.rows() == n && V.rows() == n && K.cols() == d && V.cols() == d, "attention input shapes");
    require(heads > 0 && d % heads == 0, "hidden width not divisible by heads");
    require(static_cast<Eigen::Index>(nbrs.offsets.size()) == n + 1, "neighbour list size");
    const auto dk = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    // alpha[e * heads + h] for edge e of the CSR
    std::vector<double> alpha(nbrs.index.size() * static_cast<std::size_t>(heads));
    Mat out = Mat::Zero(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int b = nbrs.offsets[static_cast<std::size_t>(i)];
        const int e = nbrs.offsets[static_cast<std::size_t>(i) + 1];
        for (int h = 0; h < heads; ++h) {
            const auto c0 = h * dk;
            double mx = -INFINITY;
            for (int p = b; p < e; ++p) {
                const int j = nbrs.index[static_cast<std::size_t>(p)];
                const double s = Q.row(i).segment(c0, dk).dot(K.row(j).segment(c0, dk)) * scale;
                alpha[static_cast<std::size_t>(p * heads + h)] = s;
                mx = std::max(mx, s);
            }
            double z = 0.0;
            for (int p = b; p < e; ++p) {
                auto& a = alpha[static_cast<std::size_t>(p * heads + h)];
                a = std::exp(a - mx);
                z += a;
            }
            for (int p = b; p < e; ++p) {
                auto& a = alpha[static_cast<std::size_t>(p * heads + h)];
                a /= z;
                const int j = nbrs.index[static_cast<std::size_t>(p)];
                out.row(i).segment(c0, dk) += a * V.row(j).segment(c0, dk);
            }
        }
    }
    return push(std::move(out), [q, k, v, &nbrs, heads, alpha = std::move(alpha), dk, scale](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        const Mat& Q = t.value(q);
        const Mat& K = t.value(k);
        const Mat& V = t.value(v);
        Mat& gq = t.grad(q);
        Mat& gk = t.grad(k);
        Mat& gv = t.grad(v);
        std::vector<double> dalpha;
        for (Eigen::Index i = 0; i < Q.rows(); ++i) {
            const int b = nbrs.offsets[static_cast<std::size_t>(i)];
            const int e = nbrs.offsets[static_cast<std::size_t>(i) + 1];
            for (int h = 0; h < heads; ++h) {
                const auto c0 = h * dk;
                dalpha.assign(static_cast<std::size_t>(e - b), 0.0);
                double dot = 0.0;
                for (int p = b; p < e; ++p) {
                    const int j = nbrs.index[static_cast<std::size_t>(p)];
                    const double a = alpha[static_cast<std::size_t>(p * heads + h)];
                    gv.row(j).segment(c0, dk) += a * g.row(i).segment(c0, dk);
                    const double da = g.row(i).segment(c0, dk).dot(V.row(j).segment(c0, dk));
                    dalpha[static_cast<std::size_t>(p - b)] = da;
                    dot += a * da;
                }
                for (int p = b; p < e; ++p) {
                    const int j = nbrs.index[static_cast<std::size_t>(p)];
                    const double a = alpha[static_cast<std::size_t>(p * heads + h)];
                    const double ds = a * (dalpha[static_cast<std::size_t>(p - b)] - dot) * scale;
                    gq.row(i).segment(c0, dk) += ds * K.row(j).segment(c0, dk);
                    gk.row(j).segment(c0, dk) += ds * Q.row(i).segment(c0, dk);
                }
            }
        }
    });
}

int Tape::segment_mean(int a, std::vector<int> offsets)
{
    const Mat& x = value(a);
    require(!offsets.empty() && offsets.back() == x.rows(), "segment offsets do not cover the rows");
    const auto segs = static_cast<Eigen::Index>(offsets.size()) - 1;
    Mat out(segs, x.cols());
    for (Eigen::Index s = 0; s < segs; ++s) {
        const int b = offsets[static_cast<std::size_t>(s)];
        const int e = offsets[static_cast<std::size_t>(s) + 1];
        require(e > b, "empty segment");
        out.row(s) = x.middleRows(b, e - b).colwise().sum() / static_cast<double>(e - b);
    }
    return push(std::move(out), [a, offsets = std::move(offsets)](Tape& t, int self) {
        const Mat& g = t.own_grad(self);
        Mat& ga = t.grad(a);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
            const int b = offsets[s];
            const int e = offsets[s + 1];
            const double w = 1.0 / static_cast<double>(e - b);
            for (int r = b; r < e; ++r) {
                ga.row(r) += w * g.row(static_cast<Eigen::Index>(s));
            }
        }
    });
}

void Tape::backward(int root, const Mat& seed)
{
    const Mat& rv = value(root);
    require(seed.rows() == rv.rows() && seed.cols() == rv.cols(), "backward seed shape");
    grad(root) += seed;
    for (int id = root; id >= 0; --id) {
        auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.size() == 0) {
            continue;
        }
        if (n.back) {
            n.back(*this, id);
        }
        if (n.param != nullptr) {
            n.param->grad += n.grad;
        }
    }
}

} // namespace staug::gt
