#include "cks/nn/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace cks::nn {

namespace {
std::atomic<uint64_t> g_next_id{1};
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

bool has_nan(const Tensor& t) {
    for (float x : t.v)
        if (std::isnan(x) || std::isinf(x)) return true;
    return false;
}

Var make_leaf(Tensor t, bool requires_grad) {
    auto n = std::make_shared<TensorNode>();
    n->t = std::move(t);
    n->requires_grad = requires_grad;
    n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    if (requires_grad) n->t.ensure_grad();
    return n;
}

Var make_const(Tensor t) { return make_leaf(std::move(t), false); }

Var make_op(Tensor t, std::vector<Var> parents, std::function<void(TensorNode&)> backward_fn) {
    bool req = false;
    for (const Var& p : parents) req = req || p->requires_grad;
    auto n = std::make_shared<TensorNode>();
    n->t = std::move(t);
    n->requires_grad = req;
    n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    if (req) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    return n;
}

void backward(const Var& loss) {
    if (loss->t.numel() != 1) throw ArgError("backward: loss must be scalar");
    if (!loss->requires_grad) throw ArgError("backward: loss does not require grad");

    // Collect reachable grad-requiring nodes; creation ids give a topo order.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    std::vector<TensorNode*> stack{loss.get()};
    seen.insert(loss.get());
    while (!stack.empty()) {
        TensorNode* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (const Var& p : n->parents)
            if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
    std::sort(order.begin(), order.end(),
              [](const TensorNode* a, const TensorNode* b) { return a->id > b->id; });

    for (TensorNode* n : order) n->t.ensure_grad();
    loss->t.g[0] += 1.0f;
    for (TensorNode* n : order)
        if (n->backward_fn) n->backward_fn(*n);
}

void kaiming_uniform(Tensor& w, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / std::max(1, fan_in));
    for (float& x : w.v) x = static_cast<float>(rng.uniform(-bound, bound));
}

void bias_uniform(Tensor& b, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(std::max(1, fan_in));
    for (float& x : b.v) x = static_cast<float>(rng.uniform(-bound, bound));
}

}  // namespace cks::nn
