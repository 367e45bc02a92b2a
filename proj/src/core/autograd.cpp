#include "flowsynth/core/autograd.hpp"

#include <atomic>
#include <stdexcept>
#include <unordered_map>

#include "flowsynth/core/ops.hpp"

namespace flowsynth::ag {

namespace {
std::atomic<std::uint64_t> g_next_id{1};
thread_local bool g_grad_enabled = true;
}  // namespace

std::uint64_t Node::next_id() { return g_next_id.fetch_add(1, std::memory_order_relaxed); }

double Node::scalar() const {
    if (val.rows() != 1 || val.cols() != 1) throw std::logic_error("scalar() on non-1x1 node");
    return val(0, 0);
}

bool GradMode::enabled() { return g_grad_enabled; }
void GradMode::set(bool on) { g_grad_enabled = on; }

Var leaf(Mat value, bool requires_grad) {
    return std::make_shared<Node>(std::move(value), requires_grad && GradMode::enabled());
}

Var constant(Mat value) { return std::make_shared<Node>(std::move(value), false); }

Var constant_scalar(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
}

std::vector<Var> gradient(const Var& output, const std::vector<Var>& wrt) {
    if (!output) throw std::invalid_argument("gradient: null output");
    if (output->rows() != 1 || output->cols() != 1)
        throw std::invalid_argument("gradient: output must be 1x1");

    // collect the subgraph reachable from the output
    std::unordered_map<const Node*, Var> reach;
    std::vector<Node*> stack{output.get()};
    reach.emplace(output.get(), output);
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        for (const Edge& e : n->edges) {
            if (reach.emplace(e.parent.get(), e.parent).second) stack.push_back(e.parent.get());
        }
    }

    // creation order is a topological order: edges always point to older nodes
    std::vector<Node*> order;
    order.reserve(reach.size());
    for (auto& [p, v] : reach) order.push_back(const_cast<Node*>(p));
    std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->id > b->id; });

    std::unordered_map<const Node*, Var> grads;
    grads[output.get()] = constant(Mat::Ones(1, 1));

    for (Node* n : order) {
        auto git = grads.find(n);
        if (git == grads.end()) continue;  // not on a path from the output
        const Var& g = git->second;
        for (const Edge& e : n->edges) {
            Var contrib = e.vjp(g);
            if (contrib->rows() != e.parent->rows() || contrib->cols() != e.parent->cols())
                throw std::logic_error("vjp produced wrong shape");
            auto pit = grads.find(e.parent.get());
            if (pit == grads.end()) {
                grads.emplace(e.parent.get(), contrib);
            } else {
                pit->second = add(pit->second, contrib);
            }
        }
    }

    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const Var& w : wrt) {
        auto it = grads.find(w.get());
        if (it != grads.end()) {
            out.push_back(it->second);
        } else {
            out.push_back(constant(Mat::Zero(w->rows(), w->cols())));
        }
    }
    return out;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace flowsynth::ag
