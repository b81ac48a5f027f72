#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "afkit/errors.hpp"
#include "afkit/nn/tensor.hpp"

namespace afkit::nn {

enum class LossKind { Mse, CategoricalCrossEntropy };

inline std::string loss_name(LossKind k) {
    return k == LossKind::Mse ? "mse" : "categorical_cross_entropy";
}

inline LossKind loss_from_name(const std::string& s) {
    if (s == "mse") return LossKind::Mse;
    if (s == "categorical_cross_entropy") return LossKind::CategoricalCrossEntropy;
    throw ParseError("unknown loss: " + s);
}

// Mean squared error over every element of the batch.
template <class T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    if (pred.shape != target.shape)
        throw ShapeError("mse: prediction " + shape_str(pred.shape) + " vs target " +
                         shape_str(target.shape));
    T acc{0};
    for (size_t i = 0; i < pred.numel(); ++i) {
        const T d = pred.data[i] - target.data[i];
        acc += d * d;
    }
    return acc / static_cast<T>(pred.numel());
}

template <class T>
Tensor<T> mse_grad(const Tensor<T>& pred, const Tensor<T>& target) {
    Tensor<T> g(pred.shape);
    const T scale = T{2} / static_cast<T>(pred.numel());
    for (size_t i = 0; i < pred.numel(); ++i)
        g.data[i] = scale * (pred.data[i] - target.data[i]);
    return g;
}

// Categorical cross-entropy over class scores. Rows are renormalized to sum
// to one first, so sigmoid heads and softmax heads go through the same loss;
// for softmax rows the renormalization is the identity.
template <class T>
T cce_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    if (pred.shape != target.shape)
        throw ShapeError("cce: prediction " + shape_str(pred.shape) + " vs target " +
                         shape_str(target.shape));
    const size_t classes = pred.shape.back();
    const size_t rows = pred.numel() / classes;
    const T floor = static_cast<T>(1e-12);
    T acc{0};
    for (size_t r = 0; r < rows; ++r) {
        const T* p = pred.ptr() + r * classes;
        const T* y = target.ptr() + r * classes;
        T sum{0};
        for (size_t c = 0; c < classes; ++c) sum += std::max(p[c], floor);
        for (size_t c = 0; c < classes; ++c)
            acc -= y[c] * std::log(std::max(p[c], floor) / sum);
    }
    return acc / static_cast<T>(rows);
}

template <class T>
Tensor<T> cce_grad(const Tensor<T>& pred, const Tensor<T>& target) {
    const size_t classes = pred.shape.back();
    const size_t rows = pred.numel() / classes;
    const T floor = static_cast<T>(1e-12);
    Tensor<T> g(pred.shape);
    for (size_t r = 0; r < rows; ++r) {
        const T* p = pred.ptr() + r * classes;
        const T* y = target.ptr() + r * classes;
        T sum{0}, ysum{0};
        for (size_t c = 0; c < classes; ++c) {
            sum += std::max(p[c], floor);
            ysum += y[c];
        }
        T* gr = g.ptr() + r * classes;
        for (size_t c = 0; c < classes; ++c) {
            const T pc = std::max(p[c], floor);
            gr[c] = (ysum / sum - y[c] / pc) / static_cast<T>(rows);
        }
    }
    return g;
}

template <class T>
T loss_value(LossKind k, const Tensor<T>& pred, const Tensor<T>& target) {
    return k == LossKind::Mse ? mse_loss(pred, target) : cce_loss(pred, target);
}

template <class T>
Tensor<T> loss_grad(LossKind k, const Tensor<T>& pred, const Tensor<T>& target) {
    return k == LossKind::Mse ? mse_grad(pred, target) : cce_grad(pred, target);
}

}  // namespace afkit::nn
