// OpenMP kernels. Work is split across independent output elements only;
// every element is accumulated in the same order as in kernels_serial.cpp,
// so results match the serial reference bit-for-bit at any thread count.

#include "afkit/nn/kernels.hpp"

#include <algorithm>
#include <limits>

namespace afkit::nn::parallel {

template <class T>
void matmul_nn(const T* a, const T* b, const T* bias, T* y, size_t rows, size_t k,
               size_t n) {
#pragma omp parallel for schedule(static)
    for (size_t r = 0; r < rows; ++r) {
        T* yr = y + r * n;
        if (bias)
            std::copy(bias, bias + n, yr);
        else
            std::fill(yr, yr + n, T{0});
        const T* ar = a + r * k;
        for (size_t i = 0; i < k; ++i) {
            const T av = ar[i];
            const T* br = b + i * n;
            for (size_t j = 0; j < n; ++j) yr[j] += av * br[j];
        }
    }
}

template <class T>
void matmul_nt(const T* a, const T* b, T* y, size_t rows, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
    for (size_t r = 0; r < rows; ++r) {
        const T* ar = a + r * n;
        T* yr = y + r * k;
        for (size_t i = 0; i < k; ++i) {
            const T* br = b + i * n;
            T acc{0};
            for (size_t j = 0; j < n; ++j) acc += ar[j] * br[j];
            yr[i] = acc;
        }
    }
}

template <class T>
void matmul_tn(const T* a, const T* b, T* y, size_t rows, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
    for (size_t i = 0; i < k; ++i) {
        T* yr = y + i * n;
        std::fill(yr, yr + n, T{0});
        for (size_t r = 0; r < rows; ++r) {
            const T av = a[r * k + i];
            const T* br = b + r * n;
            for (size_t j = 0; j < n; ++j) yr[j] += av * br[j];
        }
    }
}

template <class T>
void col_sum(const T* a, T* out, size_t rows, size_t n) {
#pragma omp parallel for schedule(static)
    for (size_t j = 0; j < n; ++j) {
        T acc{0};
        for (size_t r = 0; r < rows; ++r) acc += a[r * n + j];
        out[j] = acc;
    }
}

template <class T>
void col_mean_var(const T* a, size_t rows, size_t n, T* mean, T* var) {
#pragma omp parallel for schedule(static)
    for (size_t j = 0; j < n; ++j) {
        T m{0};
        for (size_t r = 0; r < rows; ++r) m += a[r * n + j];
        m /= static_cast<T>(rows);
        T v{0};
        for (size_t r = 0; r < rows; ++r) {
            const T d = a[r * n + j] - m;
            v += d * d;
        }
        mean[j] = m;
        var[j] = v / static_cast<T>(rows);
    }
}

template <class T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y, size_t batch,
                    size_t lin, size_t cin, size_t ksize, size_t filters, size_t stride,
                    ptrdiff_t pad_left, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t row = 0; row < batch * lout; ++row) {
        const size_t b = row / lout;
        const size_t i = row % lout;
        T* yr = y + row * filters;
        if (bias)
            std::copy(bias, bias + filters, yr);
        else
            std::fill(yr, yr + filters, T{0});
        for (size_t k = 0; k < ksize; ++k) {
            const ptrdiff_t xi = static_cast<ptrdiff_t>(i * stride + k) - pad_left;
            if (xi < 0 || xi >= static_cast<ptrdiff_t>(lin)) continue;
            const T* xr = x + (b * lin + static_cast<size_t>(xi)) * cin;
            const T* wk = w + k * cin * filters;
            for (size_t c = 0; c < cin; ++c) {
                const T xv = xr[c];
                const T* wc = wk + c * filters;
                for (size_t f = 0; f < filters; ++f) yr[f] += xv * wc[f];
            }
        }
    }
}

template <class T>
void conv1d_backward_input(const T* dy, const T* w, T* dx, size_t batch, size_t lin,
                           size_t cin, size_t ksize, size_t filters, size_t stride,
                           ptrdiff_t pad_left, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t row = 0; row < batch * lin; ++row) {
        const size_t b = row / lin;
        const size_t j = row % lin;
        T* dxr = dx + row * cin;
        std::fill(dxr, dxr + cin, T{0});
        for (size_t k = 0; k < ksize; ++k) {
            const ptrdiff_t t = static_cast<ptrdiff_t>(j) + pad_left - static_cast<ptrdiff_t>(k);
            if (t < 0 || t % static_cast<ptrdiff_t>(stride) != 0) continue;
            const size_t i = static_cast<size_t>(t) / stride;
            if (i >= lout) continue;
            const T* dyr = dy + (b * lout + i) * filters;
            const T* wk = w + k * cin * filters;
            for (size_t c = 0; c < cin; ++c) {
                const T* wc = wk + c * filters;
                T acc{0};
                for (size_t f = 0; f < filters; ++f) acc += dyr[f] * wc[f];
                dxr[c] += acc;
            }
        }
    }
}

template <class T>
void conv1d_backward_params(const T* x, const T* dy, T* dw, T* db, size_t batch,
                            size_t lin, size_t cin, size_t ksize, size_t filters,
                            size_t stride, ptrdiff_t pad_left, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t f = 0; f < filters; ++f) {
        T bacc{0};
        for (size_t k = 0; k < ksize; ++k)
            for (size_t c = 0; c < cin; ++c) dw[(k * cin + c) * filters + f] = T{0};
        for (size_t b = 0; b < batch; ++b) {
            for (size_t i = 0; i < lout; ++i) {
                const T g = dy[(b * lout + i) * filters + f];
                bacc += g;
                for (size_t k = 0; k < ksize; ++k) {
                    const ptrdiff_t xi = static_cast<ptrdiff_t>(i * stride + k) - pad_left;
                    if (xi < 0 || xi >= static_cast<ptrdiff_t>(lin)) continue;
                    const T* xr = x + (b * lin + static_cast<size_t>(xi)) * cin;
                    T* dwk = dw + k * cin * filters + f;
                    for (size_t c = 0; c < cin; ++c) dwk[c * filters] += xr[c] * g;
                }
            }
        }
        db[f] = bacc;
    }
}

template <class T>
void deconv1d_forward(const T* x, const T* w, const T* bias, T* y, size_t batch,
                      size_t lin, size_t cin, size_t ksize, size_t filters, size_t stride,
                      ptrdiff_t pad_left, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t row = 0; row < batch * lout; ++row) {
        const size_t b = row / lout;
        const size_t j = row % lout;
        T* yr = y + row * filters;
        if (bias)
            std::copy(bias, bias + filters, yr);
        else
            std::fill(yr, yr + filters, T{0});
        for (size_t k = 0; k < ksize; ++k) {
            const ptrdiff_t t = static_cast<ptrdiff_t>(j) + pad_left - static_cast<ptrdiff_t>(k);
            if (t < 0 || t % static_cast<ptrdiff_t>(stride) != 0) continue;
            const size_t i = static_cast<size_t>(t) / stride;
            if (i >= lin) continue;
            const T* xr = x + (b * lin + i) * cin;
            const T* wk = w + k * cin * filters;
            for (size_t c = 0; c < cin; ++c) {
                const T xv = xr[c];
                const T* wc = wk + c * filters;
                for (size_t f = 0; f < filters; ++f) yr[f] += xv * wc[f];
            }
        }
    }
}

template <class T>
void deconv1d_backward_input(const T* dy, const T* w, T* dx, size_t batch, size_t lin,
                             size_t cin, size_t ksize, size_t filters, size_t stride,
                             ptrdiff_t pad_left, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t row = 0; row < batch * lin; ++row) {
        const size_t b = row / lin;
        const size_t i = row % lin;
        T* dxr = dx + row * cin;
        std::fill(dxr, dxr + cin, T{0});
        for (size_t k = 0; k < ksize; ++k) {
            const ptrdiff_t j = static_cast<ptrdiff_t>(i * stride + k) - pad_left;
            if (j < 0 || j >= static_cast<ptrdiff_t>(lout)) continue;
            const T* dyr = dy + (b * lout + static_cast<size_t>(j)) * filters;
            const T* wk = w + k * cin * filters;
            for (size_t c = 0; c < cin; ++c) {
                const T* wc = wk + c * filters;
                T acc{0};
                for (size_t f = 0; f < filters; ++f) acc += dyr[f] * wc[f];
                dxr[c] += acc;
            }
        }
    }
}

template <class T>
void deconv1d_backward_params(const T* x, const T* dy, T* dw, T* db, size_t batch,
                              size_t lin, size_t cin, size_t ksize, size_t filters,
                              size_t stride, ptrdiff_t pad_left, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t f = 0; f < filters; ++f) {
        T bacc{0};
        for (size_t k = 0; k < ksize; ++k)
            for (size_t c = 0; c < cin; ++c) dw[(k * cin + c) * filters + f] = T{0};
        for (size_t b = 0; b < batch; ++b) {
            for (size_t j = 0; j < lout; ++j) {
                const T g = dy[(b * lout + j) * filters + f];
                bacc += g;
                for (size_t k = 0; k < ksize; ++k) {
                    const ptrdiff_t t =
                        static_cast<ptrdiff_t>(j) + pad_left - static_cast<ptrdiff_t>(k);
                    if (t < 0 || t % static_cast<ptrdiff_t>(stride) != 0) continue;
                    const size_t i = static_cast<size_t>(t) / stride;
                    if (i >= lin) continue;
                    const T* xr = x + (b * lin + i) * cin;
                    T* dwk = dw + k * cin * filters + f;
                    for (size_t c = 0; c < cin; ++c) dwk[c * filters] += xr[c] * g;
                }
            }
        }
        db[f] = bacc;
    }
}

template <class T>
void maxpool1d_forward(const T* x, T* y, int32_t* idx, size_t batch, size_t lin,
                       size_t channels, size_t pool, size_t stride, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t row = 0; row < batch * lout; ++row) {
        const size_t b = row / lout;
        const size_t o = row % lout;
        T* yr = y + row * channels;
        int32_t* ir = idx + row * channels;
        for (size_t c = 0; c < channels; ++c) {
            T best = -std::numeric_limits<T>::infinity();
            int32_t bestj = -1;
            for (size_t t = 0; t < pool; ++t) {
                const size_t j = o * stride + t;
                if (j >= lin) break;
                const T v = x[(b * lin + j) * channels + c];
                if (v > best) {
                    best = v;
                    bestj = static_cast<int32_t>(j);
                }
            }
            yr[c] = best;
            ir[c] = bestj;
        }
    }
}

template <class T>
void maxpool1d_backward(const T* dy, const int32_t* idx, T* dx, size_t batch, size_t lin,
                        size_t channels, size_t pool, size_t stride, size_t lout) {
#pragma omp parallel for schedule(static)
    for (size_t row = 0; row < batch * lin; ++row) {
        const size_t b = row / lin;
        const size_t j = row % lin;
        T* dxr = dx + row * channels;
        const size_t olo = (j + 1 > pool) ? (j + 1 - pool + stride - 1) / stride : 0;
        const size_t ohi = std::min(j / stride, lout == 0 ? 0 : lout - 1);
        for (size_t c = 0; c < channels; ++c) {
            T acc{0};
            for (size_t o = olo; o <= ohi && o < lout; ++o) {
                if (idx[(b * lout + o) * channels + c] == static_cast<int32_t>(j))
                    acc += dy[(b * lout + o) * channels + c];
            }
            dxr[c] = acc;
        }
    }
}

#define AFKIT_INSTANTIATE(T)                                                              \
    template void matmul_nn<T>(const T*, const T*, const T*, T*, size_t, size_t, size_t); \
    template void matmul_nt<T>(const T*, const T*, T*, size_t, size_t, size_t);           \
    template void matmul_tn<T>(const T*, const T*, T*, size_t, size_t, size_t);           \
    template void col_sum<T>(const T*, T*, size_t, size_t);                               \
    template void col_mean_var<T>(const T*, size_t, size_t, T*, T*);                      \
    template void conv1d_forward<T>(const T*, const T*, const T*, T*, size_t, size_t,     \
                                    size_t, size_t, size_t, size_t, ptrdiff_t, size_t);   \
    template void conv1d_backward_input<T>(const T*, const T*, T*, size_t, size_t,        \
                                           size_t, size_t, size_t, size_t, ptrdiff_t,     \
                                           size_t);                                       \
    template void conv1d_backward_params<T>(const T*, const T*, T*, T*, size_t, size_t,   \
                                            size_t, size_t, size_t, size_t, ptrdiff_t,    \
                                            size_t);                                      \
    template void deconv1d_forward<T>(const T*, const T*, const T*, T*, size_t, size_t,   \
                                      size_t, size_t, size_t, size_t, ptrdiff_t, size_t); \
    template void deconv1d_backward_input<T>(const T*, const T*, T*, size_t, size_t,      \
                                             size_t, size_t, size_t, size_t, ptrdiff_t,   \
                                             size_t);                                     \
    template void deconv1d_backward_params<T>(const T*, const T*, T*, T*, size_t, size_t, \
                                              size_t, size_t, size_t, size_t, ptrdiff_t,  \
                                              size_t);                                    \
    template void maxpool1d_forward<T>(const T*, T*, int32_t*, size_t, size_t, size_t,    \
                                       size_t, size_t, size_t);                           \
    template void maxpool1d_backward<T>(const T*, const int32_t*, T*, size_t, size_t,     \
                                        size_t, size_t, size_t, size_t);

AFKIT_INSTANTIATE(float)
AFKIT_INSTANTIATE(double)
#undef AFKIT_INSTANTIATE

}  // namespace afkit::nn::parallel
