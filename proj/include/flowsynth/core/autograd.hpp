#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace flowsynth::ag {

using Mat = Eigen::MatrixXd;

class Node;
using Var = std::shared_ptr<Node>;

// Gradient contribution to one parent, expressed as graph operations so that
// gradients are themselves differentiable (the gradient penalty needs
// d/dphi of ||d/dx C(x)||).
using Vjp = std::function<Var(const Var& grad_out)>;

struct Edge {
    Var parent;
    Vjp vjp;
};

class Node {
public:
    Node(Mat value, bool requires_grad)
        : val(std::move(value)), requires_grad(requires_grad), id(next_id()) {}

    Mat val;
    bool requires_grad;
    std::uint64_t id;
    std::vector<Edge> edges;

    Eigen::Index rows() const { return val.rows(); }
    Eigen::Index cols() const { return val.cols(); }
    double scalar() const;

    static std::uint64_t next_id();
};

// While disabled, ops compute values but record no edges; used on pure
// inference paths (generation, prediction, monitoring).
class GradMode {
public:
    static bool enabled();
    static void set(bool on);
};

struct NoGradGuard {
    NoGradGuard() : prev_(GradMode::enabled()) { GradMode::set(false); }
    ~NoGradGuard() { GradMode::set(prev_); }

private:
    bool prev_;
};

Var leaf(Mat value, bool requires_grad = true);
Var constant(Mat value);
Var constant_scalar(double v);

// Reverse-mode gradient of a 1x1 output with respect to each node in wrt.
// Returned gradients are graph nodes and can be differentiated again.
std::vector<Var> gradient(const Var& output, const std::vector<Var>& wrt);

bool all_finite(const Mat& m);

}  // namespace flowsynth::ag
