#include "afkit/nn/kernels.hpp"

#include <atomic>

namespace afkit::nn {

namespace {
std::atomic<Backend> g_backend{Backend::Parallel};
}

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

namespace dispatch {

#define AFKIT_DISPATCH(call)                \
    if (backend() == Backend::Parallel)     \
        parallel::call;                     \
    else                                    \
        serial::call;

template <class T>
void matmul_nn(const T* a, const T* b, const T* bias, T* y, size_t rows, size_t k,
               size_t n) {
    AFKIT_DISPATCH(matmul_nn(a, b, bias, y, rows, k, n))
}

template <class T>
void matmul_nt(const T* a, const T* b, T* y, size_t rows, size_t k, size_t n) {
    AFKIT_DISPATCH(matmul_nt(a, b, y, rows, k, n))
}

template <class T>
void matmul_tn(const T* a, const T* b, T* y, size_t rows, size_t k, size_t n) {
    AFKIT_DISPATCH(matmul_tn(a, b, y, rows, k, n))
}

template <class T>
void col_sum(const T* a, T* out, size_t rows, size_t n) {
    AFKIT_DISPATCH(col_sum(a, out, rows, n))
}

template <class T>
void col_mean_var(const T* a, size_t rows, size_t n, T* mean, T* var) {
    AFKIT_DISPATCH(col_mean_var(a, rows, n, mean, var))
}

template <class T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y, size_t batch,
                    size_t lin, size_t cin, size_t ksize, size_t filters, size_t stride,
                    ptrdiff_t pad_left, size_t lout) {
    AFKIT_DISPATCH(conv1d_forward(x, w, bias, y, batch, lin, cin, ksize, filters, stride,
                                  pad_left, lout))
}

template <class T>
void conv1d_backward_input(const T* dy, const T* w, T* dx, size_t batch, size_t lin,
                           size_t cin, size_t ksize, size_t filters, size_t stride,
                           ptrdiff_t pad_left, size_t lout) {
    AFKIT_DISPATCH(conv1d_backward_input(dy, w, dx, batch, lin, cin, ksize, filters,
                                         stride, pad_left, lout))
}

template <class T>
void conv1d_backward_params(const T* x, const T* dy, T* dw, T* db, size_t batch,
                            size_t lin, size_t cin, size_t ksize, size_t filters,
                            size_t stride, ptrdiff_t pad_left, size_t lout) {
    AFKIT_DISPATCH(conv1d_backward_params(x, dy, dw, db, batch, lin, cin, ksize, filters,
                                          stride, pad_left, lout))
}

template <class T>
void deconv1d_forward(const T* x, const T* w, const T* bias, T* y, size_t batch,
                      size_t lin, size_t cin, size_t ksize, size_t filters, size_t stride,
                      ptrdiff_t pad_left, size_t lout) {
    AFKIT_DISPATCH(deconv1d_forward(x, w, bias, y, batch, lin, cin, ksize, filters,
                                    stride, pad_left, lout))
}

template <class T>
void deconv1d_backward_input(const T* dy, const T* w, T* dx, size_t batch, size_t lin,
                             size_t cin, size_t ksize, size_t filters, size_t stride,
                             ptrdiff_t pad_left, size_t lout) {
    AFKIT_DISPATCH(deconv1d_backward_input(dy, w, dx, batch, lin, cin, ksize, filters,
                                           stride, pad_left, lout))
}

template <class T>
void deconv1d_backward_params(const T* x, const T* dy, T* dw, T* db, size_t batch,
                              size_t lin, size_t cin, size_t ksize, size_t filters,
                              size_t stride, ptrdiff_t pad_left, size_t lout) {
    AFKIT_DISPATCH(deconv1d_backward_params(x, dy, dw, db, batch, lin, cin, ksize,
                                            filters, stride, pad_left, lout))
}

template <class T>
void maxpool1d_forward(const T* x, T* y, int32_t* idx, size_t batch, size_t lin,
                       size_t channels, size_t pool, size_t stride, size_t lout) {
    AFKIT_DISPATCH(maxpool1d_forward(x, y, idx, batch, lin, channels, pool, stride, lout))
}

template <class T>
void maxpool1d_backward(const T* dy, const int32_t* idx, T* dx, size_t batch, size_t lin,
                        size_t channels, size_t pool, size_t stride, size_t lout) {
    AFKIT_DISPATCH(maxpool1d_backward(dy, idx, dx, batch, lin, channels, pool, stride,
                                      lout))
}

#undef AFKIT_DISPATCH

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

}  // namespace dispatch
}  // namespace afkit::nn
