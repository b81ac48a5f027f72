#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "afkit/nn/loss.hpp"
#include "afkit/nn/network.hpp"
#include "afkit/nn/optimize.hpp"
#include "afkit/rng.hpp"

namespace afkit::nn {

template <class T>
struct TrainConfig {
    AdamConfig<T> adam;
    size_t batch_size = 32;
    size_t max_epochs = 30;
    // early stopping on validation loss; disabled when unset
    std::optional<size_t> patience;
    LossKind loss = LossKind::Mse;
    uint64_t seed = 1;
    bool restore_best = true;
};

struct EpochStats {
    size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_metric = 0.0;  // accuracy for cross-entropy, val_loss for MSE
};

using History = std::vector<EpochStats>;

inline void write_history_csv(const std::string& path, const History& h) {
    std::ofstream out(path);
    out << "epoch,train_loss,val_loss,val_metric\n";
    out.precision(10);
    for (const auto& e : h)
        out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ','
            << e.val_metric << '\n';
}

template <class T>
double accuracy(const Tensor<T>& pred, const Tensor<T>& target) {
    const size_t classes = pred.shape.back();
    const size_t rows = pred.numel() / classes;
    size_t hits = 0;
    for (size_t r = 0; r < rows; ++r) {
        const T* p = pred.ptr() + r * classes;
        const T* y = target.ptr() + r * classes;
        size_t pa = 0, ya = 0;
        for (size_t c = 1; c < classes; ++c) {
            if (p[c] > p[pa]) pa = c;
            if (y[c] > y[ya]) ya = c;
        }
        if (pa == ya) ++hits;
    }
    return rows ? static_cast<double>(hits) / static_cast<double>(rows) : 0.0;
}

template <class T>
Tensor<T> gather_rows(const Tensor<T>& x, const std::vector<size_t>& idx, size_t begin,
                      size_t end) {
    const size_t row = x.numel() / x.dim(0);
    Shape s = x.shape;
    s[0] = end - begin;
    Tensor<T> out(s);
    for (size_t i = begin; i < end; ++i)
        std::copy(x.ptr() + idx[i] * row, x.ptr() + (idx[i] + 1) * row,
                  out.ptr() + (i - begin) * row);
    return out;
}

// Batched inference pass; returns (loss, metric).
template <class T>
std::pair<double, double> evaluate(Network<T>& net, const Tensor<T>& x,
                                   const Tensor<T>& y, LossKind loss,
                                   size_t batch_size = 256) {
    const size_t n = x.dim(0);
    std::vector<size_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = i;
    double loss_acc = 0.0, metric_acc = 0.0;
    for (size_t b = 0; b < n; b += batch_size) {
        const size_t e = std::min(n, b + batch_size);
        Tensor<T> xb = gather_rows(x, ids, b, e);
        Tensor<T> yb = gather_rows(y, ids, b, e);
        Tensor<T> pred = net.infer(xb);
        loss_acc += static_cast<double>(loss_value(loss, pred, yb)) *
                    static_cast<double>(e - b);
        if (loss == LossKind::CategoricalCrossEntropy)
            metric_acc += accuracy(pred, yb) * static_cast<double>(e - b);
    }
    const double vl = loss_acc / static_cast<double>(n);
    const double vm = loss == LossKind::CategoricalCrossEntropy
                          ? metric_acc / static_cast<double>(n)
                          : vl;
    return {vl, vm};
}

// Mini-batch training with per-epoch reshuffling, early stopping on the
// validation loss and best-weight restoration. Deterministic given the seed.
template <class T>
History train(Network<T>& net, const Tensor<T>& x, const Tensor<T>& y,
              const Tensor<T>& xval, const Tensor<T>& yval, const TrainConfig<T>& cfg,
              const std::function<void(const EpochStats&)>& on_epoch = {}) {
    if (x.dim(0) == 0 || xval.dim(0) == 0)
        throw ConfigError("train: datasets must be non-empty");
    if (y.dim(0) != x.dim(0) || yval.dim(0) != xval.dim(0))
        throw ShapeError("train: sample/label counts disagree");

    const size_t n = x.dim(0);
    Adam<T> adam(cfg.adam);
    auto trainable = net.trainable_params();
    History history;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Tensor<T>> best_params;
    size_t since_best = 0;

    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;

    for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng shuffle_rng = Rng(cfg.seed, 0xE70C).fork(epoch);
        shuffle_rng.shuffle(idx);
        Rng dropout_rng = Rng(cfg.seed, 0xD409).fork(epoch);
        ForwardCtx ctx;
        ctx.training = true;
        ctx.rng = &dropout_rng;

        double loss_acc = 0.0;
        size_t batch_no = 0;
        for (size_t b = 0; b < n; b += cfg.batch_size, ++batch_no) {
            const size_t e = std::min(n, b + cfg.batch_size);
            Tensor<T> xb = gather_rows(x, idx, b, e);
            Tensor<T> yb = gather_rows(y, idx, b, e);
            Tensor<T> pred = net.forward(xb, ctx);
            const T lv = loss_value(cfg.loss, pred, yb);
            if (!std::isfinite(static_cast<double>(lv)))
                throw DivergenceFault("non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(batch_no));
            loss_acc += static_cast<double>(lv) * static_cast<double>(e - b);
            net.backward(loss_grad(cfg.loss, pred, yb));
            adam.step(trainable);
        }

        auto [val_loss, val_metric] = evaluate(net, xval, yval, cfg.loss);
        if (!std::isfinite(val_loss))
            throw DivergenceFault("non-finite validation loss at epoch " +
                                  std::to_string(epoch));

        EpochStats stats{epoch, loss_acc / static_cast<double>(n), val_loss, val_metric};
        history.push_back(stats);
        if (on_epoch) on_epoch(stats);

        if (val_loss < best_val) {
            best_val = val_loss;
            since_best = 0;
            if (cfg.restore_best) best_params = net.snapshot_params();
        } else {
            ++since_best;
        }
        if (cfg.patience && since_best > *cfg.patience) break;
    }

    if (cfg.restore_best && !best_params.empty()) net.restore_params(best_params);
    return history;
}

}  // namespace afkit::nn
