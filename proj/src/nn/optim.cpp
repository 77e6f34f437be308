#include "cks/nn/optim.hpp"

#include <cmath>

namespace cks::nn {

Adam::Adam(std::vector<Var> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Var& p : params_) {
        p->t.ensure_grad();
        m_.emplace_back(p->t.numel(), 0.0f);
        v_.emplace_back(p->t.numel(), 0.0f);
    }
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), static_cast<double>(step_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor& t = params_[i]->t;
        float* m = m_[i].data();
        float* v = v_[i].data();
        for (size_t j = 0; j < t.numel(); ++j) {
            const float g = t.g[j];
            m[j] = cfg_.beta1 * m[j] + (1.0f - cfg_.beta1) * g;
            v[j] = cfg_.beta2 * v[j] + (1.0f - cfg_.beta2) * g * g;
            const float mhat = static_cast<float>(m[j] / bc1);
            const float vhat = static_cast<float>(v[j] / bc2);
            t.v[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (const Var& p : params_) p->t.zero_grad();
}

void Adam::scale_grads(float inv_n) {
    for (const Var& p : params_)
        for (float& g : p->t.g) g *= inv_n;
}

}  // namespace cks::nn
