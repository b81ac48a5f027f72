#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "afkit/nn/layers.hpp"
#include "afkit/nn/lstm.hpp"

namespace afkit::nn {

template <class T>
class Network {
public:
    Network() = default;

    Network& add(std::unique_ptr<Layer<T>> layer) {
        if (built_) throw StateError("Network: cannot add layers after build");
        layers_.push_back(std::move(layer));
        return *this;
    }

    template <class L, class... Args>
    Network& emplace(Args&&... args) {
        return add(std::make_unique<L>(std::forward<Args>(args)...));
    }

    // input: per-sample shape, e.g. {300, 1}
    void build(Shape input, uint64_t init_seed) {
        if (built_) throw StateError("Network: already built");
        input_shape_ = input;
        Rng rng(init_seed, /*stream=*/0x1417);
        Shape s = std::move(input);
        for (auto& l : layers_) s = l->build(s, rng);
        output_shape_ = s;
        built_ = true;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) {
        require_built();
        Tensor<T> cur = x;
        for (size_t i = 0; i < layers_.size(); ++i) {
            try {
                cur = layers_[i]->forward(cur, ctx);
            } catch (const ShapeError& e) {
                throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
            }
        }
        forwarded_train_ = ctx.training;
        return cur;
    }

    Tensor<T> infer(const Tensor<T>& x) {
        ForwardCtx ctx;
        ctx.training = false;
        return forward(x, ctx);
    }

    // Propagates dL/d(output); fills every parameter gradient and returns
    // dL/d(input).
    Tensor<T> backward(const Tensor<T>& loss_grad) {
        require_built();
        if (!forwarded_train_)
            throw StateError("Network: backward requires a prior training forward");
        Tensor<T> g = loss_grad;
        for (size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
        return g;
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        for (auto& l : layers_)
            for (auto* p : l->params()) out.push_back(p);
        return out;
    }

    std::vector<Param<T>*> trainable_params() {
        std::vector<Param<T>*> out;
        for (auto* p : params())
            if (p->trainable) out.push_back(p);
        return out;
    }

    struct LayerCount {
        std::string kind;
        Shape output_shape;
        size_t param_count;
    };

    // per-layer parameter tallies plus the total, as a model summary would list
    std::pair<std::vector<LayerCount>, size_t> count_params() {
        require_built();
        std::vector<LayerCount> rows;
        size_t total = 0;
        for (auto& l : layers_) {
            const size_t n = l->param_count();
            rows.push_back({l->kind(), l->output_shape(), n});
            total += n;
        }
        return {rows, total};
    }

    size_t size() const { return layers_.size(); }
    Layer<T>& layer(size_t i) { return *layers_.at(i); }
    const Shape& input_shape() const { return input_shape_; }
    const Shape& output_shape() const { return output_shape_; }
    bool built() const { return built_; }

    // snapshot/restore of all parameter values (early stopping keeps the best)
    std::vector<Tensor<T>> snapshot_params() {
        std::vector<Tensor<T>> out;
        for (auto* p : params()) out.push_back(p->value);
        return out;
    }

    void restore_params(const std::vector<Tensor<T>>& snap) {
        auto ps = params();
        if (snap.size() != ps.size())
            throw StateError("Network: parameter snapshot does not match");
        for (size_t i = 0; i < ps.size(); ++i) ps[i]->value = snap[i];
    }

private:
    void require_built() const {
        if (!built_) throw StateError("Network: build() not called");
    }

    std::vector<std::unique_ptr<Layer<T>>> layers_;
    Shape input_shape_, output_shape_;
    bool built_ = false;
    bool forwarded_train_ = false;
};

}  // namespace afkit::nn
