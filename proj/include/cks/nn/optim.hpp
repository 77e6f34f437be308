#pragma once

#include "cks/nn/tensor.hpp"

namespace cks::nn {

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

/// Standard Adam with bias correction over a fixed parameter list.
class Adam {
public:
    Adam(std::vector<Var> params, AdamConfig cfg = {});

    void step();
    void zero_grad();
    /// Divides accumulated gradients by n (mini-batch mean before step()).
    void scale_grads(float inv_n);

    int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<Var> params_;
    AdamConfig cfg_;
    int64_t step_ = 0;
    std::vector<std::vector<float>> m_, v_;
};

}  // namespace cks::nn
