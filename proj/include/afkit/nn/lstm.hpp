#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "afkit/nn/layers.hpp"

namespace afkit::nn {

// Single-direction LSTM. Gate layout follows the common convention
// [input, forget, cell, output]; the forget-gate bias starts at 1.
template <class T>
class Lstm : public Layer<T> {
public:
    Lstm(size_t units, bool return_sequences)
        : units_(units), return_sequences_(return_sequences) {}

    std::string kind() const override { return "LSTM"; }

    Shape build(const Shape& input, Rng& rng) override {
        if (input.size() != 2)
            throw ShapeError("LSTM: expected (steps, features) input, got " +
                             shape_str(input));
        this->in_shape_ = input;
        steps_ = input[0];
        in_ = input[1];
        w_.name = "W";
        w_.value = Tensor<T>({in_, 4 * units_});
        fan_in_uniform(w_.value, in_, rng);
        w_.init_zero_grad();
        u_.name = "U";
        u_.value = Tensor<T>({units_, 4 * units_});
        fan_in_uniform(u_.value, units_, rng);
        u_.init_zero_grad();
        b_.name = "b";
        b_.value = Tensor<T>({4 * units_});
        for (size_t j = units_; j < 2 * units_; ++j) b_.value.data[j] = T{1};
        b_.init_zero_grad();
        this->out_shape_ = return_sequences_ ? Shape{steps_, units_} : Shape{units_};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t B = x.dim(0), H = units_;
        const Shape cache_shape{steps_, B, H};
        gi_ = Tensor<T>(cache_shape);
        gf_ = Tensor<T>(cache_shape);
        gg_ = Tensor<T>(cache_shape);
        go_ = Tensor<T>(cache_shape);
        c_ = Tensor<T>(cache_shape);
        tanh_c_ = Tensor<T>(cache_shape);
        h_ = Tensor<T>(cache_shape);
        Tensor<T> z({B, 4 * H}), zu({B, 4 * H});
        Tensor<T> h_prev({B, H}), c_prev({B, H});
        Tensor<T> xt({B, in_});
        for (size_t t = 0; t < steps_; ++t) {
            for (size_t b = 0; b < B; ++b)
                std::copy(x.ptr() + (b * steps_ + t) * in_,
                          x.ptr() + (b * steps_ + t + 1) * in_, xt.ptr() + b * in_);
            matmul_nn(xt.ptr(), w_.value.ptr(), b_.value.ptr(), z.ptr(), B, in_, 4 * H);
            matmul_nn(h_prev.ptr(), u_.value.ptr(), static_cast<const T*>(nullptr),
                      zu.ptr(), B, H, 4 * H);
            T* it = gi_.ptr() + t * B * H;
            T* ft = gf_.ptr() + t * B * H;
            T* gt = gg_.ptr() + t * B * H;
            T* ot = go_.ptr() + t * B * H;
            T* ct = c_.ptr() + t * B * H;
            T* tc = tanh_c_.ptr() + t * B * H;
            T* ht = h_.ptr() + t * B * H;
            for (size_t b = 0; b < B; ++b) {
                const T* zr = z.ptr() + b * 4 * H;
                const T* zur = zu.ptr() + b * 4 * H;
                for (size_t j = 0; j < H; ++j) {
                    const T zi = zr[j] + zur[j];
                    const T zf = zr[H + j] + zur[H + j];
                    const T zg = zr[2 * H + j] + zur[2 * H + j];
                    const T zo = zr[3 * H + j] + zur[3 * H + j];
                    const T iv = T{1} / (T{1} + std::exp(-zi));
                    const T fv = T{1} / (T{1} + std::exp(-zf));
                    const T gv = std::tanh(zg);
                    const T ov = T{1} / (T{1} + std::exp(-zo));
                    const T cv = fv * c_prev.data[b * H + j] + iv * gv;
                    const T tcv = std::tanh(cv);
                    it[b * H + j] = iv;
                    ft[b * H + j] = fv;
                    gt[b * H + j] = gv;
                    ot[b * H + j] = ov;
                    ct[b * H + j] = cv;
                    tc[b * H + j] = tcv;
                    ht[b * H + j] = ov * tcv;
                }
            }
            std::copy(ht, ht + B * H, h_prev.ptr());
            std::copy(ct, ct + B * H, c_prev.ptr());
        }
        if (ctx.training) x_cache_ = x;
        this->forwarded_ = ctx.training;
        batch_ = B;
        if (return_sequences_) {
            Tensor<T> y({B, steps_, H});
            for (size_t t = 0; t < steps_; ++t)
                for (size_t b = 0; b < B; ++b)
                    std::copy(h_.ptr() + (t * B + b) * H, h_.ptr() + (t * B + b + 1) * H,
                              y.ptr() + (b * steps_ + t) * H);
            return y;
        }
        Tensor<T> y({B, H});
        std::copy(h_.ptr() + (steps_ - 1) * B * H, h_.ptr() + steps_ * B * H, y.ptr());
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        const size_t B = batch_, H = units_;
        Tensor<T> dh_next({B, H}), dc_next({B, H});
        Tensor<T> dz({B, 4 * H});
        Tensor<T> dx(x_cache_.shape);
        Tensor<T> xt({B, in_});
        Tensor<T> dwt({in_, 4 * H}), dut({H, 4 * H}), dbt({4 * H});
        Tensor<T> dxt({B, in_}), dhp({B, H});
        w_.grad.fill(T{0});
        u_.grad.fill(T{0});
        b_.grad.fill(T{0});
        for (size_t t = steps_; t-- > 0;) {
            const T* it = gi_.ptr() + t * B * H;
            const T* ft = gf_.ptr() + t * B * H;
            const T* gt = gg_.ptr() + t * B * H;
            const T* ot = go_.ptr() + t * B * H;
            const T* tc = tanh_c_.ptr() + t * B * H;
            const T* cprev = t > 0 ? c_.ptr() + (t - 1) * B * H : nullptr;
            for (size_t b = 0; b < B; ++b) {
                for (size_t j = 0; j < H; ++j) {
                    const size_t e = b * H + j;
                    T dh = dh_next.data[e];
                    if (return_sequences_)
                        dh += dy.data[(b * steps_ + t) * H + j];
                    else if (t == steps_ - 1)
                        dh += dy.data[e];
                    const T dov = dh * tc[e];
                    T dc = dc_next.data[e] + dh * ot[e] * (T{1} - tc[e] * tc[e]);
                    const T div = dc * gt[e];
                    const T dgv = dc * it[e];
                    const T cp = cprev ? cprev[e] : T{0};
                    const T dfv = dc * cp;
                    dc_next.data[e] = dc * ft[e];
                    T* dzr = dz.ptr() + b * 4 * H;
                    dzr[j] = div * it[e] * (T{1} - it[e]);
                    dzr[H + j] = dfv * ft[e] * (T{1} - ft[e]);
                    dzr[2 * H + j] = dgv * (T{1} - gt[e] * gt[e]);
                    dzr[3 * H + j] = dov * ot[e] * (T{1} - ot[e]);
                }
            }
            for (size_t b = 0; b < B; ++b)
                std::copy(x_cache_.ptr() + (b * steps_ + t) * in_,
                          x_cache_.ptr() + (b * steps_ + t + 1) * in_, xt.ptr() + b * in_);
            matmul_tn(xt.ptr(), dz.ptr(), dwt.ptr(), B, in_, 4 * H);
            for (size_t i = 0; i < dwt.numel(); ++i) w_.grad.data[i] += dwt.data[i];
            if (t > 0) {
                const T* hp = h_.ptr() + (t - 1) * B * H;
                matmul_tn(hp, dz.ptr(), dut.ptr(), B, H, 4 * H);
                for (size_t i = 0; i < dut.numel(); ++i) u_.grad.data[i] += dut.data[i];
            }
            col_sum(dz.ptr(), dbt.ptr(), B, 4 * H);
            for (size_t i = 0; i < dbt.numel(); ++i) b_.grad.data[i] += dbt.data[i];
            matmul_nt(dz.ptr(), w_.value.ptr(), dxt.ptr(), B, in_, 4 * H);
            for (size_t b = 0; b < B; ++b)
                std::copy(dxt.ptr() + b * in_, dxt.ptr() + (b + 1) * in_,
                          dx.ptr() + (b * steps_ + t) * in_);
            matmul_nt(dz.ptr(), u_.value.ptr(), dhp.ptr(), B, H, 4 * H);
            std::copy(dhp.ptr(), dhp.ptr() + B * H, dh_next.ptr());
        }
        return dx;
    }

    std::vector<Param<T>*> params() override { return {&w_, &u_, &b_}; }

    json config() const override {
        return {{"units", units_}, {"return_sequences", return_sequences_}};
    }

private:
    size_t units_, in_ = 0, steps_ = 0, batch_ = 0;
    bool return_sequences_;
    Param<T> w_, u_, b_;
    // step-major caches: [steps, batch, units]
    Tensor<T> gi_, gf_, gg_, go_, c_, tanh_c_, h_;
    Tensor<T> x_cache_;
};

// Two LSTMs over opposite time directions, outputs concatenated on the
// feature axis. For return_sequences=false the reverse half reports its
// final state (the one that has seen the whole sequence).
template <class T>
class BiLstm : public Layer<T> {
public:
    BiLstm(size_t units, bool return_sequences)
        : units_(units),
          return_sequences_(return_sequences),
          fw_(units, return_sequences),
          bw_(units, return_sequences) {}

    std::string kind() const override { return "BiLSTM"; }

    Shape build(const Shape& input, Rng& rng) override {
        this->in_shape_ = input;
        fw_.build(input, rng);
        bw_.build(input, rng);
        steps_ = input[0];
        this->out_shape_ =
            return_sequences_ ? Shape{steps_, 2 * units_} : Shape{2 * units_};
        return this->out_shape_;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardCtx& ctx) override {
        this->check_input(x);
        const size_t B = x.dim(0), H = units_;
        Tensor<T> yf = fw_.forward(x, ctx);
        Tensor<T> yb = bw_.forward(reverse_time(x), ctx);
        batch_ = B;
        this->forwarded_ = ctx.training;
        if (return_sequences_) {
            Tensor<T> yb_fwd = reverse_time(yb);
            Tensor<T> y({B, steps_, 2 * H});
            for (size_t b = 0; b < B; ++b)
                for (size_t t = 0; t < steps_; ++t) {
                    T* out = y.ptr() + (b * steps_ + t) * 2 * H;
                    std::copy(yf.ptr() + (b * steps_ + t) * H,
                              yf.ptr() + (b * steps_ + t + 1) * H, out);
                    std::copy(yb_fwd.ptr() + (b * steps_ + t) * H,
                              yb_fwd.ptr() + (b * steps_ + t + 1) * H, out + H);
                }
            return y;
        }
        Tensor<T> y({B, 2 * H});
        for (size_t b = 0; b < B; ++b) {
            std::copy(yf.ptr() + b * H, yf.ptr() + (b + 1) * H, y.ptr() + b * 2 * H);
            std::copy(yb.ptr() + b * H, yb.ptr() + (b + 1) * H, y.ptr() + b * 2 * H + H);
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        this->require_forwarded();
        const size_t B = batch_, H = units_;
        Tensor<T> dyf, dyb;
        if (return_sequences_) {
            dyf = Tensor<T>({B, steps_, H});
            dyb = Tensor<T>({B, steps_, H});
            for (size_t b = 0; b < B; ++b)
                for (size_t t = 0; t < steps_; ++t) {
                    const T* g = dy.ptr() + (b * steps_ + t) * 2 * H;
                    std::copy(g, g + H, dyf.ptr() + (b * steps_ + t) * H);
                    std::copy(g + H, g + 2 * H, dyb.ptr() + (b * steps_ + t) * H);
                }
            dyb = reverse_time(dyb);
        } else {
            dyf = Tensor<T>({B, H});
            dyb = Tensor<T>({B, H});
            for (size_t b = 0; b < B; ++b) {
                std::copy(dy.ptr() + b * 2 * H, dy.ptr() + b * 2 * H + H,
                          dyf.ptr() + b * H);
                std::copy(dy.ptr() + b * 2 * H + H, dy.ptr() + (b + 1) * 2 * H,
                          dyb.ptr() + b * H);
            }
        }
        Tensor<T> dxf = fw_.backward(dyf);
        Tensor<T> dxb = reverse_time(bw_.backward(dyb));
        for (size_t i = 0; i < dxf.numel(); ++i) dxf.data[i] += dxb.data[i];
        return dxf;
    }

    std::vector<Param<T>*> params() override {
        auto p = fw_.params();
        auto q = bw_.params();
        p.insert(p.end(), q.begin(), q.end());
        return p;
    }

    json config() const override {
        return {{"units", units_}, {"return_sequences", return_sequences_}};
    }

private:
    // flips the time axis of a (batch, steps, features) tensor
    static Tensor<T> reverse_time(const Tensor<T>& x) {
        const size_t B = x.dim(0), L = x.dim(1), F = x.dim(2);
        Tensor<T> y(x.shape);
        for (size_t b = 0; b < B; ++b)
            for (size_t t = 0; t < L; ++t)
                std::copy(x.ptr() + (b * L + t) * F, x.ptr() + (b * L + t + 1) * F,
                          y.ptr() + (b * L + (L - 1 - t)) * F);
        return y;
    }

    size_t units_, steps_ = 0, batch_ = 0;
    bool return_sequences_;
    Lstm<T> fw_, bw_;
};

}  // namespace afkit::nn
