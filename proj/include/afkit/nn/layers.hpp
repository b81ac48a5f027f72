#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "afkit/errors.hpp"
#include "afkit/nn/kernels.hpp"
#include "afkit/nn/tensor.hpp"
#include "afkit/rng.hpp"

namespace afkit::nn {

using json = nlohmann::json;

template <class T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool trainable = true;

    void init_zero_grad() { grad = Tensor<T>(value.shape); }
};

struct ForwardCtx {
    bool training = false;
    Rng* rng = nullptr;  // consumed by Dropout when training
};

enum class Act { Linear, Relu, LeakyRelu, Sigmoid, Tanh, Softmax };

inline std::string act_name(Act a) {
    switch (a) {
        case Act::Linear: return "linear";
        case Act::Relu: return "relu";
        case Act::LeakyRelu: return "leaky_relu";
        case Act::Sigmoid: return "sigmoid";
        case Act::Tanh: return "tanh";
        case Act::Softmax: return "softmax";
    }
    return "linear";
}

inline Act act_from_name(const std::string& s) {
    if (s == "linear") return Act::Linear;
    if (s == "relu") return Act::Relu;
    if (s == "leaky_relu") return Act::LeakyRelu;
    if (s == "sigmoid") return Act::Sigmoid;
    if (s == "tanh") return Act::Tanh;
    if (s == "softmax") return Act::Softmax;
    throw ParseError("unknown activation: " + s);
}

// Elementwise (or, for softmax, row-wise) activation with cached state for
// the backward pass. Embedded by Dense/Conv/Deconv and by the standalone
// Activation layer.
template <class T>
struct ActOp {
    Act kind = Act::Linear;
    T alpha = T{0};         // negative slope for LeakyRelu
    Tensor<T> pre;          // cached pre-activation (Relu/LeakyRelu)
    Tensor<T> out;          // cached output (Sigmoid/Tanh/Softmax)

    void apply(Tensor<T>& x, bool cache) {
        switch (kind) {
            case Act::Linear:
                return;
            case Act::Relu:
            case Act::LeakyRelu: {
                if (cache) pre = x;
                const T a = (kind == Act::Relu) ? T{0} : alpha;
                for (auto& v : x.data) v = v > T{0} ? v : a * v;
                return;
            }
            case Act::Sigmoid: {
                for (auto& v : x.data) v = T{1} / (T{1} + std::exp(-v));
                if (cache) out = x;
                return;
            }
            case Act::Tanh: {
                for (auto& v : x.data) v = std::tanh(v);
                if (cache) out = x;
                return;
            }
            case Act::Softmax: {
                const size_t n = x.shape.back();
                const size_t rows = x.numel() / n;
                for (size_t r = 0; r < rows; ++r) {
                    T* p = x.ptr() + r * n;
                    T mx = p[0];
                    for (size_t j = 1; j < n; ++j) mx = std::max(mx, p[j]);
                    T sum{0};
                    for (size_t j = 0; j < n; ++j) {
                        p[j] = std::exp(p[j] - mx);
                        sum += p[j];
                    }
                    for (size_t j = 0; j < n; ++j) p[j] /= sum;
                }
                if (cache) out = x;
                return;
            }
        }
    }

    // maps dL/dy to dL/dz in place
    void backward(Tensor<T>& dy) const {
        switch (kind) {
            case Act::Linear:
                return;
            case Act::Relu:
            case Act::LeakyRelu: {
                const T a = (kind == Act::Relu) ? T{0} : alpha;
                for (size_t i = 0; i < dy.numel(); ++i)
                    dy.data[i] *= pre.data[i] > T{0} ? T{1} : a;
                return;
            }
            case Act::Sigmoid: {
                for (size_t i = 0; i < dy.numel(); ++i) {
                    const T y = out.data[i];
                    dy.data[i] *= y * (T{1} - y);
                }
                return;
            }
            case Act::Tanh: {
                for (size_t i = 0; i < dy.numel(); ++i) {
                    const T y = out.data[i];
                    dy.data[i] *= T{1} - y * y;
                }
                return;
            }
            case Act::Softmax: {
                const size_t n = dy.shape.back();
                const size_t rows = dy.numel() / n;
                for (size_t r = 0; r < rows; ++r) {
                    T* g = dy.ptr() + r * n;
                    const T* y = out.ptr() + r * n;
                    T dot{0};
                    for (size_t j = 0; j < n; ++j) dot += g[j] * y[j];
                    for (size_t j = 0; j < n; ++j) g[j] = y[j] * (g[j] - dot);
                }
                return;
            }
        }
    }
};

template <class T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual std::string kind() const = 0;
    // computes the output sample shape and allocates parameters
    virtual Shape build(const Shape& input, Rng& init) = 0;
    virtual Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) = 0;
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    virtual std::vector<Param<T>*> params() { return {}; }
    virtual json config() const { return json::object(); }

    size_t param_count() {
        size_t n = 0;
        for (auto* p : params()) n += p->value.numel();
        return n;
    }

    const Shape& input_shape() const { return in_shape_; }
    const Shape& output_shape() const { return out_shape_; }

protected:
    Shape in_shape_, out_shape_;
    bool forwarded_ = false;

    void check_input(const Tensor<T>& x) const {
        if (x.rank() != in_shape_.size() + 1 ||
            !std::equal(in_shape_.begin(), in_shape_.end(), x.shape.begin() + 1))
            throw ShapeError(this->kind() + ": expected input " + shape_str(in_shape_) +
                             " per sample, got " + shape_str(x.shape));
    }

    void require_forwarded() const {
        if (!forwarded_)
            throw StateError(this->kind() + ": backward called before forward");
    }
};

// fan-in-scaled uniform init: U(-sqrt(1/fan_in), +sqrt(1/fan_in))
template <class T>
void fan_in_uniform(Tensor<T>& w, size_t fan_in, Rng& rng) {
    const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (auto& v : w.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

template <class T>
class Dense : public Layer<T> {
public:
    Dense(size_t units, Act act = Act::Linear, T alpha = T{0}) : units_(units) {
        act_.kind = act;
        act_.alpha = alpha;
    }

    std::string kind() const override { return "Dense"; }

    Shape build(const Shape& input, Rng& rng) override {
        if (input.empty()) throw ShapeError("Dense: scalar input");
        this->in_shape_ = input;
        in_features_ = input.back();
        w_.name = "W";
        w_.value = Tensor<T>({in_features_, units_});
        fan_in_uniform(w_.value, in_features_, rng);
        w_.init_zero_grad();
        b_.name = "b";
        b_.value = Tensor<T>({units_});
        b_.init_zero_grad();
        this->out_shape_ = input;
        this->out_shape_.back() = units_;
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t rows = x.numel() / in_features_;
        Shape out_shape = x.shape;
        out_shape.back() = units_;
        Tensor<T> y(out_shape);
        matmul_nn(x.ptr(), w_.value.ptr(), b_.value.ptr(), y.ptr(), rows, in_features_,
                  units_);
        act_.apply(y, true);
        if (ctx.training) x_cache_ = x;
        this->forwarded_ = ctx.training;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy_in) override {
        this->require_forwarded();
        Tensor<T> dy = dy_in;
        act_.backward(dy);
        const size_t rows = dy.numel() / units_;
        matmul_tn(x_cache_.ptr(), dy.ptr(), w_.grad.ptr(), rows, in_features_, units_);
        col_sum(dy.ptr(), b_.grad.ptr(), rows, units_);
        Tensor<T> dx(x_cache_.shape);
        matmul_nt(dy.ptr(), w_.value.ptr(), dx.ptr(), rows, in_features_, units_);
        return dx;
    }

    std::vector<Param<T>*> params() override { return {&w_, &b_}; }

    json config() const override {
        return {{"units", units_},
                {"activation", act_name(act_.kind)},
                {"alpha", static_cast<double>(act_.alpha)}};
    }

private:
    size_t units_, in_features_ = 0;
    ActOp<T> act_;
    Param<T> w_, b_;
    Tensor<T> x_cache_;
};

enum class Padding { Valid, Same };

inline std::string padding_name(Padding p) { return p == Padding::Valid ? "valid" : "same"; }
inline Padding padding_from_name(const std::string& s) {
    if (s == "valid") return Padding::Valid;
    if (s == "same") return Padding::Same;
    throw ParseError("unknown padding: " + s);
}

template <class T>
class Conv1D : public Layer<T> {
public:
    Conv1D(size_t filters, size_t ksize, size_t stride = 1, Padding pad = Padding::Valid,
           Act act = Act::Linear, T alpha = T{0})
        : filters_(filters), ksize_(ksize), stride_(stride), pad_(pad) {
        act_.kind = act;
        act_.alpha = alpha;
    }

    std::string kind() const override { return "Conv1D"; }

    Shape build(const Shape& input, Rng& rng) override {
        if (input.size() != 2)
            throw ShapeError("Conv1D: expected (length, channels) input, got " +
                             shape_str(input));
        this->in_shape_ = input;
        lin_ = input[0];
        cin_ = input[1];
        if (pad_ == Padding::Valid) {
            if (lin_ < ksize_) throw ShapeError("Conv1D: kernel longer than input");
            lout_ = (lin_ - ksize_) / stride_ + 1;
            pad_left_ = 0;
        } else {
            lout_ = (lin_ + stride_ - 1) / stride_;
            const size_t pad_total =
                std::max<ptrdiff_t>(0, static_cast<ptrdiff_t>((lout_ - 1) * stride_ +
                                                              ksize_) -
                                           static_cast<ptrdiff_t>(lin_));
            pad_left_ = static_cast<ptrdiff_t>(pad_total / 2);
        }
        w_.name = "W";
        w_.value = Tensor<T>({ksize_, cin_, filters_});
        fan_in_uniform(w_.value, ksize_ * cin_, rng);
        w_.init_zero_grad();
        b_.name = "b";
        b_.value = Tensor<T>({filters_});
        b_.init_zero_grad();
        this->out_shape_ = {lout_, filters_};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t batch = x.dim(0);
        Tensor<T> y({batch, lout_, filters_});
        conv1d_forward(x.ptr(), w_.value.ptr(), b_.value.ptr(), y.ptr(), batch, lin_,
                       cin_, ksize_, filters_, stride_, pad_left_, lout_);
        act_.apply(y, true);
        if (ctx.training) x_cache_ = x;
        this->forwarded_ = ctx.training;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy_in) override {
        this->require_forwarded();
        Tensor<T> dy = dy_in;
        act_.backward(dy);
        const size_t batch = x_cache_.dim(0);
        conv1d_backward_params(x_cache_.ptr(), dy.ptr(), w_.grad.ptr(), b_.grad.ptr(),
                               batch, lin_, cin_, ksize_, filters_, stride_, pad_left_,
                               lout_);
        Tensor<T> dx(x_cache_.shape);
        conv1d_backward_input(dy.ptr(), w_.value.ptr(), dx.ptr(), batch, lin_, cin_,
                              ksize_, filters_, stride_, pad_left_, lout_);
        return dx;
    }

    std::vector<Param<T>*> params() override { return {&w_, &b_}; }

    json config() const override {
        return {{"filters", filters_},      {"kernel_size", ksize_},
                {"stride", stride_},        {"padding", padding_name(pad_)},
                {"activation", act_name(act_.kind)}, {"alpha", static_cast<double>(act_.alpha)}};
    }

private:
    size_t filters_, ksize_, stride_;
    Padding pad_;
    size_t lin_ = 0, cin_ = 0, lout_ = 0;
    ptrdiff_t pad_left_ = 0;
    ActOp<T> act_;
    Param<T> w_, b_;
    Tensor<T> x_cache_;
};

// Transposed 1-D convolution; output length = input length * stride.
template <class T>
class Deconv1D : public Layer<T> {
public:
    Deconv1D(size_t filters, size_t ksize, size_t stride = 2, Act act = Act::Linear,
             T alpha = T{0})
        : filters_(filters), ksize_(ksize), stride_(stride) {
        act_.kind = act;
        act_.alpha = alpha;
    }

    std::string kind() const override { return "Deconv1D"; }

    Shape build(const Shape& input, Rng& rng) override {
        if (input.size() != 2)
            throw ShapeError("Deconv1D: expected (length, channels) input, got " +
                             shape_str(input));
        this->in_shape_ = input;
        lin_ = input[0];
        cin_ = input[1];
        lout_ = lin_ * stride_;
        // mirror of a 'same' strided conv mapping lout_ -> lin_
        const size_t pad_total = ksize_ > stride_ ? ksize_ - stride_ : 0;
        pad_left_ = static_cast<ptrdiff_t>(pad_total / 2);
        w_.name = "W";
        w_.value = Tensor<T>({ksize_, cin_, filters_});
        fan_in_uniform(w_.value, ksize_ * cin_, rng);
        w_.init_zero_grad();
        b_.name = "b";
        b_.value = Tensor<T>({filters_});
        b_.init_zero_grad();
        this->out_shape_ = {lout_, filters_};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t batch = x.dim(0);
        Tensor<T> y({batch, lout_, filters_});
        deconv1d_forward(x.ptr(), w_.value.ptr(), b_.value.ptr(), y.ptr(), batch, lin_,
                         cin_, ksize_, filters_, stride_, pad_left_, lout_);
        act_.apply(y, true);
        if (ctx.training) x_cache_ = x;
        this->forwarded_ = ctx.training;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy_in) override {
        this->require_forwarded();
        Tensor<T> dy = dy_in;
        act_.backward(dy);
        const size_t batch = x_cache_.dim(0);
        deconv1d_backward_params(x_cache_.ptr(), dy.ptr(), w_.grad.ptr(), b_.grad.ptr(),
                                 batch, lin_, cin_, ksize_, filters_, stride_, pad_left_,
                                 lout_);
        Tensor<T> dx(x_cache_.shape);
        deconv1d_backward_input(dy.ptr(), w_.value.ptr(), dx.ptr(), batch, lin_, cin_,
                                ksize_, filters_, stride_, pad_left_, lout_);
        return dx;
    }

    std::vector<Param<T>*> params() override { return {&w_, &b_}; }

    json config() const override {
        return {{"filters", filters_},
                {"kernel_size", ksize_},
                {"stride", stride_},
                {"activation", act_name(act_.kind)},
                {"alpha", static_cast<double>(act_.alpha)}};
    }

private:
    size_t filters_, ksize_, stride_;
    size_t lin_ = 0, cin_ = 0, lout_ = 0;
    ptrdiff_t pad_left_ = 0;
    ActOp<T> act_;
    Param<T> w_, b_;
    Tensor<T> x_cache_;
};

template <class T>
class MaxPool1D : public Layer<T> {
public:
    MaxPool1D(size_t pool = 2, size_t stride = 2, Padding pad = Padding::Same)
        : pool_(pool), stride_(stride), pad_(pad) {}

    std::string kind() const override { return "MaxPool1D"; }

    Shape build(const Shape& input, Rng&) override {
        if (input.size() != 2)
            throw ShapeError("MaxPool1D: expected (length, channels) input, got " +
                             shape_str(input));
        this->in_shape_ = input;
        lin_ = input[0];
        channels_ = input[1];
        if (pad_ == Padding::Same) {
            lout_ = (lin_ + stride_ - 1) / stride_;
            // right-edge clipping only; a left pad would need pool > stride + 1
            const size_t pad_total = std::max<ptrdiff_t>(
                0, static_cast<ptrdiff_t>((lout_ - 1) * stride_ + pool_) -
                       static_cast<ptrdiff_t>(lin_));
            if (pad_total / 2 > 0)
                throw ShapeError("MaxPool1D: unsupported pool/stride combination");
        } else {
            if (lin_ < pool_) throw ShapeError("MaxPool1D: pool longer than input");
            lout_ = (lin_ - pool_) / stride_ + 1;
        }
        this->out_shape_ = {lout_, channels_};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t batch = x.dim(0);
        Tensor<T> y({batch, lout_, channels_});
        idx_.assign(batch * lout_ * channels_, -1);
        maxpool1d_forward(x.ptr(), y.ptr(), idx_.data(), batch, lin_, channels_, pool_,
                          stride_, lout_);
        batch_ = batch;
        this->forwarded_ = ctx.training;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        Tensor<T> dx({batch_, lin_, channels_});
        maxpool1d_backward(dy.ptr(), idx_.data(), dx.ptr(), batch_, lin_, channels_,
                           pool_, stride_, lout_);
        return dx;
    }

    json config() const override {
        return {{"pool", pool_}, {"stride", stride_}, {"padding", padding_name(pad_)}};
    }

private:
    size_t pool_, stride_;
    Padding pad_;
    size_t lin_ = 0, channels_ = 0, lout_ = 0, batch_ = 0;
    std::vector<int32_t> idx_;
};

// Per-channel batch normalization over batch and spatial axes.
// Running statistics use momentum 0.99 and epsilon 1e-3.
template <class T>
class BatchNorm : public Layer<T> {
public:
    explicit BatchNorm(T momentum = T(0.99), T eps = T(1e-3))
        : momentum_(momentum), eps_(eps) {}

    std::string kind() const override { return "BatchNorm"; }

    Shape build(const Shape& input, Rng&) override {
        if (input.empty()) throw ShapeError("BatchNorm: scalar input");
        this->in_shape_ = input;
        channels_ = input.back();
        gamma_.name = "gamma";
        gamma_.value = Tensor<T>({channels_});
        gamma_.value.fill(T{1});
        gamma_.init_zero_grad();
        beta_.name = "beta";
        beta_.value = Tensor<T>({channels_});
        beta_.init_zero_grad();
        run_mean_.name = "running_mean";
        run_mean_.value = Tensor<T>({channels_});
        run_mean_.trainable = false;
        run_var_.name = "running_var";
        run_var_.value = Tensor<T>({channels_});
        run_var_.value.fill(T{1});
        run_var_.trainable = false;
        this->out_shape_ = input;
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t rows = x.numel() / channels_;
        Tensor<T> y(x.shape);
        if (ctx.training) {
            mean_ = Tensor<T>({channels_});
            var_ = Tensor<T>({channels_});
            col_mean_var(x.ptr(), rows, channels_, mean_.ptr(), var_.ptr());
            xhat_ = Tensor<T>(x.shape);
            inv_std_ = Tensor<T>({channels_});
            for (size_t c = 0; c < channels_; ++c)
                inv_std_.data[c] = T{1} / std::sqrt(var_.data[c] + eps_);
            for (size_t r = 0; r < rows; ++r) {
                const T* xr = x.ptr() + r * channels_;
                T* hr = xhat_.ptr() + r * channels_;
                T* yr = y.ptr() + r * channels_;
                for (size_t c = 0; c < channels_; ++c) {
                    hr[c] = (xr[c] - mean_.data[c]) * inv_std_.data[c];
                    yr[c] = gamma_.value.data[c] * hr[c] + beta_.value.data[c];
                }
            }
            for (size_t c = 0; c < channels_; ++c) {
                run_mean_.value.data[c] =
                    momentum_ * run_mean_.value.data[c] + (T{1} - momentum_) * mean_.data[c];
                run_var_.value.data[c] =
                    momentum_ * run_var_.value.data[c] + (T{1} - momentum_) * var_.data[c];
            }
            rows_ = rows;
            this->forwarded_ = true;
        } else {
            for (size_t r = 0; r < rows; ++r) {
                const T* xr = x.ptr() + r * channels_;
                T* yr = y.ptr() + r * channels_;
                for (size_t c = 0; c < channels_; ++c) {
                    const T inv = T{1} / std::sqrt(run_var_.value.data[c] + eps_);
                    yr[c] = gamma_.value.data[c] * (xr[c] - run_mean_.value.data[c]) * inv +
                            beta_.value.data[c];
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        const size_t rows = rows_;
        std::vector<T> sum_dy(channels_, T{0}), sum_dy_xhat(channels_, T{0});
        for (size_t r = 0; r < rows; ++r) {
            const T* gr = dy.ptr() + r * channels_;
            const T* hr = xhat_.ptr() + r * channels_;
            for (size_t c = 0; c < channels_; ++c) {
                sum_dy[c] += gr[c];
                sum_dy_xhat[c] += gr[c] * hr[c];
            }
        }
        for (size_t c = 0; c < channels_; ++c) {
            gamma_.grad.data[c] = sum_dy_xhat[c];
            beta_.grad.data[c] = sum_dy[c];
        }
        Tensor<T> dx(dy.shape);
        const T n = static_cast<T>(rows);
        for (size_t r = 0; r < rows; ++r) {
            const T* gr = dy.ptr() + r * channels_;
            const T* hr = xhat_.ptr() + r * channels_;
            T* dr = dx.ptr() + r * channels_;
            for (size_t c = 0; c < channels_; ++c) {
                dr[c] = gamma_.value.data[c] * inv_std_.data[c] *
                        (gr[c] - sum_dy[c] / n - hr[c] * sum_dy_xhat[c] / n);
            }
        }
        return dx;
    }

    std::vector<Param<T>*> params() override {
        return {&gamma_, &beta_, &run_mean_, &run_var_};
    }

    json config() const override {
        return {{"momentum", static_cast<double>(momentum_)},
                {"epsilon", static_cast<double>(eps_)}};
    }

private:
    T momentum_, eps_;
    size_t channels_ = 0, rows_ = 0;
    Param<T> gamma_, beta_, run_mean_, run_var_;
    Tensor<T> mean_, var_, xhat_, inv_std_;
};

// Inverted dropout: active only while training, identity at inference.
template <class T>
class Dropout : public Layer<T> {
public:
    explicit Dropout(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0,1)");
    }

    std::string kind() const override { return "Dropout"; }

    Shape build(const Shape& input, Rng&) override {
        this->in_shape_ = input;
        this->out_shape_ = input;
        return input;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        if (!ctx.training || rate_ == 0.0) {
            this->forwarded_ = ctx.training;
            mask_ = Tensor<T>();
            return x;
        }
        if (!ctx.rng) throw StateError("Dropout: training forward needs an rng");
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        mask_ = Tensor<T>(x.shape);
        Tensor<T> y(x.shape);
        for (size_t i = 0; i < x.numel(); ++i) {
            const T m = ctx.rng->uniform01() < rate_ ? T{0} : scale;
            mask_.data[i] = m;
            y.data[i] = x.data[i] * m;
        }
        this->forwarded_ = true;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        if (mask_.numel() == 0) return dy;
        Tensor<T> dx(dy.shape);
        for (size_t i = 0; i < dy.numel(); ++i) dx.data[i] = dy.data[i] * mask_.data[i];
        return dx;
    }

    json config() const override { return {{"rate", rate_}}; }

private:
    double rate_;
    Tensor<T> mask_;
};

template <class T>
class Flatten : public Layer<T> {
public:
    std::string kind() const override { return "Flatten"; }

    Shape build(const Shape& input, Rng&) override {
        this->in_shape_ = input;
        this->out_shape_ = {shape_numel(input)};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        batch_ = x.dim(0);
        this->forwarded_ = ctx.training;
        return x.reshaped({batch_, this->out_shape_[0]});
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        Shape s = this->in_shape_;
        s.insert(s.begin(), batch_);
        return dy.reshaped(s);
    }

private:
    size_t batch_ = 0;
};

// Repeats a feature vector n times along a new time axis: (F) -> (n, F).
template <class T>
class RepeatVector : public Layer<T> {
public:
    explicit RepeatVector(size_t n) : n_(n) {}

    std::string kind() const override { return "RepeatVector"; }

    Shape build(const Shape& input, Rng&) override {
        if (input.size() != 1)
            throw ShapeError("RepeatVector: expected flat input, got " + shape_str(input));
        this->in_shape_ = input;
        this->out_shape_ = {n_, input[0]};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t batch = x.dim(0);
        const size_t f = this->in_shape_[0];
        Tensor<T> y({batch, n_, f});
        for (size_t b = 0; b < batch; ++b)
            for (size_t t = 0; t < n_; ++t)
                std::copy(x.ptr() + b * f, x.ptr() + (b + 1) * f,
                          y.ptr() + (b * n_ + t) * f);
        batch_ = batch;
        this->forwarded_ = ctx.training;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        const size_t f = this->in_shape_[0];
        Tensor<T> dx({batch_, f});
        for (size_t b = 0; b < batch_; ++b)
            for (size_t t = 0; t < n_; ++t) {
                const T* g = dy.ptr() + (b * n_ + t) * f;
                T* d = dx.ptr() + b * f;
                for (size_t j = 0; j < f; ++j) d[j] += g[j];
            }
        return dx;
    }

    json config() const override { return {{"n", n_}}; }

private:
    size_t n_;
    size_t batch_ = 0;
};

template <class T>
class Activation : public Layer<T> {
public:
    explicit Activation(Act act, T alpha = T{0}) {
        act_.kind = act;
        act_.alpha = alpha;
    }

    std::string kind() const override { return "Activation"; }

    Shape build(const Shape& input, Rng&) override {
        this->in_shape_ = input;
        this->out_shape_ = input;
        return input;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        Tensor<T> y = x;
        act_.apply(y, true);
        this->forwarded_ = ctx.training;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy_in) override {
        this->require_forwarded();
        Tensor<T> dy = dy_in;
        act_.backward(dy);
        return dy;
    }

    json config() const override {
        return {{"activation", act_name(act_.kind)},
                {"alpha", static_cast<double>(act_.alpha)}};
    }

private:
    ActOp<T> act_;
};

}  // namespace afkit::nn
