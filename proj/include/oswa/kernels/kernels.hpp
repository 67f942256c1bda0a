#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>

// Inner-loop kernels used by the network layers.
//
// Scalar reference implementations live in oswa::kernels::scalar and are
// templated on the element type. The float entry points in oswa::kernels
// dispatch at runtime to an AVX2 variant when the CPU supports it, otherwise
// to the scalar reference. Double-precision callers (the finite-difference
// gradient checks) always use the scalar path.
//
// Conventions:
//  - activations are [channels][length], row-major, contiguous
//  - conv weights are [c_out][c_in][k], k odd, stride 1, zero "same" padding
//  - dense weights are [n_out][n_in]
//  - *_bwd_weights accumulate (+=) so gradients sum over a batch;
//    *_bwd_data overwrite their output

namespace oswa::kernels {

namespace scalar {

template <typename T>
void conv1d_fwd(const T* in, int c_in, int len, const T* w, const T* bias,
                int c_out, int k, T* out) {
  const int half = k / 2;
  for (int co = 0; co < c_out; ++co) {
    T* orow = out + static_cast<std::int64_t>(co) * len;
    for (int l = 0; l < len; ++l) orow[l] = bias[co];
    for (int ci = 0; ci < c_in; ++ci) {
      const T* irow = in + static_cast<std::int64_t>(ci) * len;
      const T* wrow = w + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      for (int t = 0; t < k; ++t) {
        const int off = t - half;
        const int lo = off < 0 ? -off : 0;
        const int hi = off > 0 ? len - off : len;
        const T wv = wrow[t];
        for (int l = lo; l < hi; ++l) orow[l] += wv * irow[l + off];
      }
    }
  }
}

template <typename T>
void conv1d_bwd_data(const T* dout, int c_out, int len, const T* w, int c_in,
                     int k, T* din) {
  const int half = k / 2;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(c_in) * len; ++i)
    din[i] = T(0);
  for (int co = 0; co < c_out; ++co) {
    const T* drow = dout + static_cast<std::int64_t>(co) * len;
    for (int ci = 0; ci < c_in; ++ci) {
      T* irow = din + static_cast<std::int64_t>(ci) * len;
      const T* wrow = w + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      for (int t = 0; t < k; ++t) {
        const int off = t - half;
        const int lo = off < 0 ? -off : 0;
        const int hi = off > 0 ? len - off : len;
        const T wv = wrow[t];
        for (int l = lo; l < hi; ++l) irow[l + off] += wv * drow[l];
      }
    }
  }
}

template <typename T>
void conv1d_bwd_weights(const T* in, int c_in, int len, const T* dout,
                        int c_out, int k, T* dw, T* dbias) {
  const int half = k / 2;
  for (int co = 0; co < c_out; ++co) {
    const T* drow = dout + static_cast<std::int64_t>(co) * len;
    T bsum = T(0);
    for (int l = 0; l < len; ++l) bsum += drow[l];
    dbias[co] += bsum;
    for (int ci = 0; ci < c_in; ++ci) {
      const T* irow = in + static_cast<std::int64_t>(ci) * len;
      T* wrow = dw + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      for (int t = 0; t < k; ++t) {
        const int off = t - half;
        const int lo = off < 0 ? -off : 0;
        const int hi = off > 0 ? len - off : len;
        T acc = T(0);
        for (int l = lo; l < hi; ++l) acc += drow[l] * irow[l + off];
        wrow[t] += acc;
      }
    }
  }
}

template <typename T>
void dense_fwd(const T* in, int n_in, const T* w, const T* bias, int n_out,
               T* out) {
  for (int o = 0; o < n_out; ++o) {
    const T* wrow = w + static_cast<std::int64_t>(o) * n_in;
    T acc = bias[o];
    for (int i = 0; i < n_in; ++i) acc += wrow[i] * in[i];
    out[o] = acc;
  }
}

template <typename T>
void dense_bwd_data(const T* dout, int n_out, const T* w, int n_in, T* din) {
  for (int i = 0; i < n_in; ++i) din[i] = T(0);
  for (int o = 0; o < n_out; ++o) {
    const T* wrow = w + static_cast<std::int64_t>(o) * n_in;
    const T d = dout[o];
    for (int i = 0; i < n_in; ++i) din[i] += d * wrow[i];
  }
}

template <typename T>
void dense_bwd_weights(const T* in, int n_in, const T* dout, int n_out, T* dw,
                       T* dbias) {
  for (int o = 0; o < n_out; ++o) {
    T* wrow = dw + static_cast<std::int64_t>(o) * n_in;
    const T d = dout[o];
    dbias[o] += d;
    for (int i = 0; i < n_in; ++i) wrow[i] += d * in[i];
  }
}

template <typename T>
void relu_fwd(const T* x, std::int64_t n, T* y) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

// dx = dy where the forward output was positive
template <typename T>
void relu_bwd(const T* y, const T* dy, std::int64_t n, T* dx) {
  for (std::int64_t i = 0; i < n; ++i) dx[i] = y[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void avgpool2_fwd(const T* in, int c, int len, T* out) {
  const int half_len = len / 2;
  for (int ch = 0; ch < c; ++ch) {
    const T* irow = in + static_cast<std::int64_t>(ch) * len;
    T* orow = out + static_cast<std::int64_t>(ch) * half_len;
    for (int l = 0; l < half_len; ++l)
      orow[l] = (irow[2 * l] + irow[2 * l + 1]) * T(0.5);
  }
}

template <typename T>
void avgpool2_bwd(const T* dout, int c, int len, T* din) {
  const int half_len = len / 2;
  for (int ch = 0; ch < c; ++ch) {
    const T* drow = dout + static_cast<std::int64_t>(ch) * half_len;
    T* irow = din + static_cast<std::int64_t>(ch) * len;
    for (int l = 0; l < half_len; ++l) {
      const T d = drow[l] * T(0.5);
      irow[2 * l] = d;
      irow[2 * l + 1] = d;
    }
  }
}

template <typename T>
void add(const T* a, const T* b, std::int64_t n, T* out) {
  for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
void axpy(T a, const T* x, std::int64_t n, T* y) {
  for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
T dot(const T* a, const T* b, std::int64_t n) {
  T acc = T(0);
  for (std::int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// One bias-corrected adaptive-moment update step.
// b1t/b2t are beta1^t and beta2^t for the current step index t.
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, std::int64_t n, T lr, T beta1,
               T beta2, T eps, T b1t, T b2t) {
  const T c1 = T(1) / (T(1) - b1t);
  const T c2 = T(1) / (T(1) - b2t);
  for (std::int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mh = m[i] * c1;
    const T vh = v[i] * c2;
    p[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

}  // namespace scalar

// Runtime-dispatched float entry points (AVX2 when available).
void conv1d_fwd(const float* in, int c_in, int len, const float* w,
                const float* bias, int c_out, int k, float* out);
void conv1d_bwd_data(const float* dout, int c_out, int len, const float* w,
                     int c_in, int k, float* din);
void conv1d_bwd_weights(const float* in, int c_in, int len, const float* dout,
                        int c_out, int k, float* dw, float* dbias);
void dense_fwd(const float* in, int n_in, const float* w, const float* bias,
               int n_out, float* out);
void dense_bwd_data(const float* dout, int n_out, const float* w, int n_in,
                    float* din);
void dense_bwd_weights(const float* in, int n_in, const float* dout, int n_out,
                       float* dw, float* dbias);
void relu_fwd(const float* x, std::int64_t n, float* y);
void relu_bwd(const float* y, const float* dy, std::int64_t n, float* dx);
void avgpool2_fwd(const float* in, int c, int len, float* out);
void avgpool2_bwd(const float* dout, int c, int len, float* din);
void add(const float* a, const float* b, std::int64_t n, float* out);
void axpy(float a, const float* x, std::int64_t n, float* y);
float dot(const float* a, const float* b, std::int64_t n);
void adam_step(float* p, const float* g, float* m, float* v, std::int64_t n,
               float lr, float beta1, float beta2, float eps, float b1t,
               float b2t);

// "avx2" or "scalar"
const char* active_backend();

// Force a backend by name; returns false if unsupported on this CPU.
// Intended for the scalar/SIMD equivalence tests.
bool force_backend(const char* name);

// Generic helpers: route float through the dispatched kernels, everything
// else through the scalar reference.
template <typename T>
inline void conv1d_fwd_t(const T* in, int c_in, int len, const T* w,
                         const T* bias, int c_out, int k, T* out) {
  if constexpr (std::is_same_v<T, float>)
    conv1d_fwd(in, c_in, len, w, bias, c_out, k, out);
  else
    scalar::conv1d_fwd(in, c_in, len, w, bias, c_out, k, out);
}

template <typename T>
inline void conv1d_bwd_data_t(const T* dout, int c_out, int len, const T* w,
                              int c_in, int k, T* din) {
  if constexpr (std::is_same_v<T, float>)
    conv1d_bwd_data(dout, c_out, len, w, c_in, k, din);
  else
    scalar::conv1d_bwd_data(dout, c_out, len, w, c_in, k, din);
}

template <typename T>
inline void conv1d_bwd_weights_t(const T* in, int c_in, int len, const T* dout,
                                 int c_out, int k, T* dw, T* dbias) {
  if constexpr (std::is_same_v<T, float>)
    conv1d_bwd_weights(in, c_in, len, dout, c_out, k, dw, dbias);
  else
    scalar::conv1d_bwd_weights(in, c_in, len, dout, c_out, k, dw, dbias);
}

template <typename T>
inline void dense_fwd_t(const T* in, int n_in, const T* w, const T* bias,
                        int n_out, T* out) {
  if constexpr (std::is_same_v<T, float>)
    dense_fwd(in, n_in, w, bias, n_out, out);
  else
    scalar::dense_fwd(in, n_in, w, bias, n_out, out);
}

template <typename T>
inline void dense_bwd_data_t(const T* dout, int n_out, const T* w, int n_in,
                             T* din) {
  if constexpr (std::is_same_v<T, float>)
    dense_bwd_data(dout, n_out, w, n_in, din);
  else
    scalar::dense_bwd_data(dout, n_out, w, n_in, din);
}

template <typename T>
inline void dense_bwd_weights_t(const T* in, int n_in, const T* dout,
                                int n_out, T* dw, T* dbias) {
  if constexpr (std::is_same_v<T, float>)
    dense_bwd_weights(in, n_in, dout, n_out, dw, dbias);
  else
    scalar::dense_bwd_weights(in, n_in, dout, n_out, dw, dbias);
}

template <typename T>
inline void relu_fwd_t(const T* x, std::int64_t n, T* y) {
  if constexpr (std::is_same_v<T, float>)
    relu_fwd(x, n, y);
  else
    scalar::relu_fwd(x, n, y);
}

template <typename T>
inline void relu_bwd_t(const T* y, const T* dy, std::int64_t n, T* dx) {
  if constexpr (std::is_same_v<T, float>)
    relu_bwd(y, dy, n, dx);
  else
    scalar::relu_bwd(y, dy, n, dx);
}

template <typename T>
inline void avgpool2_fwd_t(const T* in, int c, int len, T* out) {
  if constexpr (std::is_same_v<T, float>)
    avgpool2_fwd(in, c, len, out);
  else
    scalar::avgpool2_fwd(in, c, len, out);
}

template <typename T>
inline void avgpool2_bwd_t(const T* dout, int c, int len, T* din) {
  if constexpr (std::is_same_v<T, float>)
    avgpool2_bwd(dout, c, len, din);
  else
    scalar::avgpool2_bwd(dout, c, len, din);
}

template <typename T>
inline void add_t(const T* a, const T* b, std::int64_t n, T* out) {
  if constexpr (std::is_same_v<T, float>)
    add(a, b, n, out);
  else
    scalar::add(a, b, n, out);
}

template <typename T>
inline void axpy_t(T a, const T* x, std::int64_t n, T* y) {
  if constexpr (std::is_same_v<T, float>)
    axpy(a, x, n, y);
  else
    scalar::axpy(a, x, n, y);
}

template <typename T>
inline void adam_step_t(T* p, const T* g, T* m, T* v, std::int64_t n, T lr,
                        T beta1, T beta2, T eps, T b1t, T b2t) {
  if constexpr (std::is_same_v<T, float>)
    adam_step(p, g, m, v, n, lr, beta1, beta2, eps, b1t, b2t);
  else
    scalar::adam_step(p, g, m, v, n, lr, beta1, beta2, eps, b1t, b2t);
}

}  // namespace oswa::kernels
