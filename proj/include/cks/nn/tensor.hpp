#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cks/common.hpp"
#include "cks/rng.hpp"

namespace cks::nn {

/// Dense f32 buffer with a shape and an optional gradient buffer.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> v;  // values, row-major
    std::vector<float> g;  // gradient; empty unless tracked

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) { v.assign(numel_of(shape), 0.0f); }
    Tensor(std::vector<int> s, std::vector<float> data) : shape(std::move(s)), v(std::move(data)) {
        if (v.size() != numel_of(shape)) throw ArgError("Tensor: data does not match shape");
    }

    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) n *= static_cast<size_t>(d);
        return n;
    }
    size_t numel() const { return v.size(); }
    int dim(size_t i) const { return shape[i]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    void ensure_grad() {
        if (g.size() != v.size()) g.assign(v.size(), 0.0f);
    }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0f); }

    static Tensor full(std::vector<int> s, float value) {
        Tensor t(std::move(s));
        std::fill(t.v.begin(), t.v.end(), value);
        return t;
    }
};

std::string shape_str(const std::vector<int>& shape);
bool has_nan(const Tensor& t);

/// Node in the dynamically built computation graph. Creation order is a
/// topological order, which backward() exploits.
struct TensorNode {
    Tensor t;
    bool requires_grad = false;
    uint64_t id = 0;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;
};

using Var = std::shared_ptr<TensorNode>;

/// Leaf with gradient tracking (a parameter or an input under test).
Var make_leaf(Tensor t, bool requires_grad = true);
/// Leaf without gradient tracking (data).
Var make_const(Tensor t);
/// Op output node; requires_grad is inherited from the parents.
Var make_op(Tensor t, std::vector<Var> parents, std::function<void(TensorNode&)> backward_fn);

/// Reverse-mode sweep from a scalar loss. Accumulates into .t.g of every
/// reachable node that requires grad (so per-sample calls within a mini-batch
/// sum their parameter gradients).
void backward(const Var& loss);

// --- init helpers ------------------------------------------------------------

/// Kaiming-uniform weight fill: bound = sqrt(6 / fan_in).
void kaiming_uniform(Tensor& w, int fan_in, Rng& rng);
/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) bias fill.
void bias_uniform(Tensor& b, int fan_in, Rng& rng);

}  // namespace cks::nn
