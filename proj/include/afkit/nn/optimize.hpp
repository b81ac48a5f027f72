#pragma once

#include <cmath>
#include <vector>

#include "afkit/errors.hpp"
#include "afkit/nn/layers.hpp"

namespace afkit::nn {

template <class T>
struct AdamConfig {
    T lr = static_cast<T>(1e-3);
    T beta1 = static_cast<T>(0.9);
    T beta2 = static_cast<T>(0.999);
    T eps = static_cast<T>(1e-8);
};

// Adam with bias-corrected first and second moments.
template <class T>
class Adam {
public:
    explicit Adam(AdamConfig<T> cfg) : cfg_(cfg) {}

    void step(const std::vector<Param<T>*>& params) {
        if (m_.empty()) {
            for (auto* p : params) {
                m_.emplace_back(p->value.shape);
                v_.emplace_back(p->value.shape);
            }
        }
        if (m_.size() != params.size())
            throw StateError("Adam: parameter set changed between steps");
        ++t_;
        const T bc1 = T{1} - std::pow(cfg_.beta1, static_cast<T>(t_));
        const T bc2 = T{1} - std::pow(cfg_.beta2, static_cast<T>(t_));
        for (size_t i = 0; i < params.size(); ++i) {
            Param<T>& p = *params[i];
            for (size_t j = 0; j < p.value.numel(); ++j) {
                const T g = p.grad.data[j];
                T& m = m_[i].data[j];
                T& v = v_[i].data[j];
                m = cfg_.beta1 * m + (T{1} - cfg_.beta1) * g;
                v = cfg_.beta2 * v + (T{1} - cfg_.beta2) * g * g;
                const T mhat = m / bc1;
                const T vhat = v / bc2;
                p.value.data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    size_t timestep() const { return t_; }
    const AdamConfig<T>& config() const { return cfg_; }

private:
    AdamConfig<T> cfg_;
    std::vector<Tensor<T>> m_, v_;
    size_t t_ = 0;
};

}  // namespace afkit::nn
