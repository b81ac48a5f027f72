#pragma once

// Central finite-difference gradient oracle. Lives in test code only and is
// independent of the backward() implementations it checks: it never reads a
// layer's analytic gradients, it just re-runs forward() on perturbed inputs.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "afkit/nn/network.hpp"
#include "afkit/rng.hpp"

namespace afkit::testing {

using afkit::Rng;
using afkit::nn::ForwardCtx;
using afkit::nn::Network;
using afkit::nn::Tensor;

struct GradCheckResult {
    double max_rel_err = 0.0;
    size_t checked = 0;
};

// Scalar readout L(y) = sum_i c_i y_i with fixed random c, so dL/dy = c.
template <class T>
struct LinearReadout {
    Tensor<T> c;

    explicit LinearReadout(const afkit::nn::Shape& out_shape, Rng& rng) : c(out_shape) {
        for (auto& v : c.data) v = static_cast<T>(rng.uniform(-1.0, 1.0));
    }

    T value(const Tensor<T>& y) const {
        T acc{0};
        for (size_t i = 0; i < y.numel(); ++i) acc += c.data[i] * y.data[i];
        return acc;
    }
};

// Compares backward() against central differences over every parameter and
// every input element. The forward pass is replayed with an identically
// seeded rng so stochastic layers (dropout) see the same mask each time.
template <class T>
GradCheckResult gradcheck(Network<T>& net, const Tensor<T>& x, uint64_t rng_seed,
                          double h = 1e-4) {
    auto run_forward = [&](const Tensor<T>& input) {
        Rng rng(rng_seed, 0xD0);
        ForwardCtx ctx;
        ctx.training = true;
        ctx.rng = &rng;
        return net.forward(input, ctx);
    };

    Tensor<T> y0 = run_forward(x);
    Rng crng(rng_seed, 0xC0);
    LinearReadout<T> readout(y0.shape, crng);

    // analytic gradients
    Tensor<T> dx = net.backward(readout.c);
    std::vector<Tensor<T>> dparams;
    for (auto* p : net.params()) dparams.push_back(p->grad);

    GradCheckResult res;
    auto compare = [&](double analytic, double numeric) {
        const double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
        res.max_rel_err = std::max(res.max_rel_err, std::abs(analytic - numeric) / denom);
        ++res.checked;
    };

    // input gradient
    Tensor<T> xp = x;
    for (size_t i = 0; i < x.numel(); ++i) {
        const T orig = xp.data[i];
        xp.data[i] = orig + static_cast<T>(h);
        const double lp = static_cast<double>(readout.value(run_forward(xp)));
        xp.data[i] = orig - static_cast<T>(h);
        const double lm = static_cast<double>(readout.value(run_forward(xp)));
        xp.data[i] = orig;
        compare(static_cast<double>(dx.data[i]), (lp - lm) / (2.0 * h));
    }

    // parameter gradients (trainable only; running stats have no gradient)
    auto params = net.params();
    for (size_t pi = 0; pi < params.size(); ++pi) {
        if (!params[pi]->trainable) continue;
        auto& value = params[pi]->value;
        for (size_t i = 0; i < value.numel(); ++i) {
            const T orig = value.data[i];
            value.data[i] = orig + static_cast<T>(h);
            const double lp = static_cast<double>(readout.value(run_forward(x)));
            value.data[i] = orig - static_cast<T>(h);
            const double lm = static_cast<double>(readout.value(run_forward(x)));
            value.data[i] = orig;
            compare(static_cast<double>(dparams[pi].data[i]), (lp - lm) / (2.0 * h));
        }
    }
    return res;
}

template <class T>
Tensor<T> random_tensor(const afkit::nn::Shape& shape, Rng& rng, double lo = -1.0,
                        double hi = 1.0) {
    Tensor<T> t(shape);
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

}  // namespace afkit::testing
