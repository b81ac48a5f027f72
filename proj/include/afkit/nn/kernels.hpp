#pragma once

#include <cstddef>
#include <cstdint>

namespace afkit::nn {

// Numeric kernels exist twice: a plain serial reference and an OpenMP
// version. Both compute every output element with the same accumulation
// order, so results are bit-identical and the serial build stays a valid
// oracle for the parallel one (see tests/test_kernels.cpp and
// tools/bench_kernels.cpp).
enum class Backend { Serial, Parallel };

Backend backend();
void set_backend(Backend b);

#define AFKIT_DECLARE_KERNELS(ns)                                                        \
    namespace ns {                                                                       \
    /* y[r,n] = sum_k a[r,k] b[k,n] + bias[n]; bias may be null */                       \
    template <class T>                                                                   \
    void matmul_nn(const T* a, const T* b, const T* bias, T* y, size_t rows, size_t k,   \
                   size_t n);                                                            \
    /* y[r,k] = sum_n a[r,n] b[k,n]  (grad wrt matmul_nn input) */                       \
    template <class T>                                                                   \
    void matmul_nt(const T* a, const T* b, T* y, size_t rows, size_t k, size_t n);       \
    /* y[k,n] = sum_r a[r,k] b[r,n]  (grad wrt matmul_nn weights) */                     \
    template <class T>                                                                   \
    void matmul_tn(const T* a, const T* b, T* y, size_t rows, size_t k, size_t n);       \
    /* out[n] = sum_r a[r,n] */                                                          \
    template <class T>                                                                   \
    void col_sum(const T* a, T* out, size_t rows, size_t n);                             \
    /* mean/var (population) per column of a rows x n matrix */                          \
    template <class T>                                                                   \
    void col_mean_var(const T* a, size_t rows, size_t n, T* mean, T* var);               \
    /* x:[B,Li,Ci] w:[K,Ci,F] y:[B,Lo,F]; y[b,i,f]=bias[f]+sum_{k,c} x[b,i*s+k-pad,c]    \
     * w[k,c,f] */                                                                       \
    template <class T>                                                                   \
    void conv1d_forward(const T* x, const T* w, const T* bias, T* y, size_t batch,       \
                        size_t lin, size_t cin, size_t ksize, size_t filters,            \
                        size_t stride, ptrdiff_t pad_left, size_t lout);                 \
    template <class T>                                                                   \
    void conv1d_backward_input(const T* dy, const T* w, T* dx, size_t batch, size_t lin, \
                               size_t cin, size_t ksize, size_t filters, size_t stride,  \
                               ptrdiff_t pad_left, size_t lout);                         \
    template <class T>                                                                   \
    void conv1d_backward_params(const T* x, const T* dy, T* dw, T* db, size_t batch,     \
                                size_t lin, size_t cin, size_t ksize, size_t filters,    \
                                size_t stride, ptrdiff_t pad_left, size_t lout);         \
    /* transposed conv; x:[B,Li,Ci] w:[K,Ci,F] y:[B,Li*stride,F] */                      \
    template <class T>                                                                   \
    void deconv1d_forward(const T* x, const T* w, const T* bias, T* y, size_t batch,     \
                          size_t lin, size_t cin, size_t ksize, size_t filters,          \
                          size_t stride, ptrdiff_t pad_left, size_t lout);               \
    template <class T>                                                                   \
    void deconv1d_backward_input(const T* dy, const T* w, T* dx, size_t batch,           \
                                 size_t lin, size_t cin, size_t ksize, size_t filters,   \
                                 size_t stride, ptrdiff_t pad_left, size_t lout);        \
    template <class T>                                                                   \
    void deconv1d_backward_params(const T* x, const T* dy, T* dw, T* db, size_t batch,   \
                                  size_t lin, size_t cin, size_t ksize, size_t filters,  \
                                  size_t stride, ptrdiff_t pad_left, size_t lout);       \
    /* pool windows clip at the right edge ('same' padding) */                           \
    template <class T>                                                                   \
    void maxpool1d_forward(const T* x, T* y, int32_t* idx, size_t batch, size_t lin,     \
                           size_t channels, size_t pool, size_t stride, size_t lout);    \
    template <class T>                                                                   \
    void maxpool1d_backward(const T* dy, const int32_t* idx, T* dx, size_t batch,        \
                            size_t lin, size_t channels, size_t pool, size_t stride,     \
                            size_t lout);                                                \
    }

AFKIT_DECLARE_KERNELS(serial)
AFKIT_DECLARE_KERNELS(parallel)
AFKIT_DECLARE_KERNELS(dispatch)  // picks serial or parallel at runtime

#undef AFKIT_DECLARE_KERNELS

// Default call path: everything in layers.hpp goes through the dispatcher.
using namespace dispatch;

}  // namespace afkit::nn
