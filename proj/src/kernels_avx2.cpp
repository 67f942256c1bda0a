// AVX2/FMA variants of the float kernels. Compiled with -mavx2 -mfma; the
// dispatcher only routes here after a CPU feature check.

#include <cmath>
#include <cstdint>

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace oswa::kernels::avx2 {

namespace {

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x55);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

// y[0..n) += a * x[0..n)
inline void axpy_n(float a, const float* x, std::int64_t n, float* y) {
  const __m256 av = _mm256_set1_ps(a);
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

inline float dot_n(const float* a, const float* b, std::int64_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  float s = hsum256(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void conv1d_fwd(const float* in, int c_in, int len, const float* w,
                const float* bias, int c_out, int k, float* out) {
  const int half = k / 2;
  for (int co = 0; co < c_out; ++co) {
    float* orow = out + static_cast<std::int64_t>(co) * len;
    const __m256 bv = _mm256_set1_ps(bias[co]);
    int l = 0;
    for (; l + 8 <= len; l += 8) _mm256_storeu_ps(orow + l, bv);
    for (; l < len; ++l) orow[l] = bias[co];
    for (int ci = 0; ci < c_in; ++ci) {
      const float* irow = in + static_cast<std::int64_t>(ci) * len;
      const float* wrow = w + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      if (k == 3) {
        // edges scalar, interior fused over the three taps
        orow[0] += wrow[1] * irow[0] + wrow[2] * irow[1];
        orow[len - 1] += wrow[0] * irow[len - 2] + wrow[1] * irow[len - 1];
        const __m256 w0 = _mm256_set1_ps(wrow[0]);
        const __m256 w1 = _mm256_set1_ps(wrow[1]);
        const __m256 w2 = _mm256_set1_ps(wrow[2]);
        int j = 1;
        for (; j + 8 <= len - 1; j += 8) {
          __m256 acc = _mm256_loadu_ps(orow + j);
          acc = _mm256_fmadd_ps(w0, _mm256_loadu_ps(irow + j - 1), acc);
          acc = _mm256_fmadd_ps(w1, _mm256_loadu_ps(irow + j), acc);
          acc = _mm256_fmadd_ps(w2, _mm256_loadu_ps(irow + j + 1), acc);
          _mm256_storeu_ps(orow + j, acc);
        }
        for (; j < len - 1; ++j)
          orow[j] += wrow[0] * irow[j - 1] + wrow[1] * irow[j] +
                     wrow[2] * irow[j + 1];
      } else {
        for (int t = 0; t < k; ++t) {
          const int off = t - half;
          const int lo = off < 0 ? -off : 0;
          const int hi = off > 0 ? len - off : len;
          axpy_n(wrow[t], irow + lo + off, hi - lo, orow + lo);
        }
      }
    }
  }
}

void conv1d_bwd_data(const float* dout, int c_out, int len, const float* w,
                     int c_in, int k, float* din) {
  const int half = k / 2;
  const std::int64_t total = static_cast<std::int64_t>(c_in) * len;
  std::int64_t i = 0;
  const __m256 zv = _mm256_setzero_ps();
  for (; i + 8 <= total; i += 8) _mm256_storeu_ps(din + i, zv);
  for (; i < total; ++i) din[i] = 0.0f;
  for (int co = 0; co < c_out; ++co) {
    const float* drow = dout + static_cast<std::int64_t>(co) * len;
    for (int ci = 0; ci < c_in; ++ci) {
      float* irow = din + static_cast<std::int64_t>(ci) * len;
      const float* wrow = w + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      for (int t = 0; t < k; ++t) {
        const int off = t - half;
        const int lo = off < 0 ? -off : 0;
        const int hi = off > 0 ? len - off : len;
        axpy_n(wrow[t], drow + lo, hi - lo, irow + lo + off);
      }
    }
  }
}

void conv1d_bwd_weights(const float* in, int c_in, int len, const float* dout,
                        int c_out, int k, float* dw, float* dbias) {
  const int half = k / 2;
  for (int co = 0; co < c_out; ++co) {
    const float* drow = dout + static_cast<std::int64_t>(co) * len;
    __m256 bacc = _mm256_setzero_ps();
    int l = 0;
    for (; l + 8 <= len; l += 8)
      bacc = _mm256_add_ps(bacc, _mm256_loadu_ps(drow + l));
    float bsum = hsum256(bacc);
    for (; l < len; ++l) bsum += drow[l];
    dbias[co] += bsum;
    for (int ci = 0; ci < c_in; ++ci) {
      const float* irow = in + static_cast<std::int64_t>(ci) * len;
      float* wrow = dw + (static_cast<std::int64_t>(co) * c_in + ci) * k;
      for (int t = 0; t < k; ++t) {
        const int off = t - half;
        const int lo = off < 0 ? -off : 0;
        const int hi = off > 0 ? len - off : len;
        wrow[t] += dot_n(drow + lo, irow + lo + off, hi - lo);
      }
    }
  }
}

void dense_fwd(const float* in, int n_in, const float* w, const float* bias,
               int n_out, float* out) {
  for (int o = 0; o < n_out; ++o)
    out[o] = bias[o] + dot_n(w + static_cast<std::int64_t>(o) * n_in, in, n_in);
}

void dense_bwd_data(const float* dout, int n_out, const float* w, int n_in,
                    float* din) {
  for (int i = 0; i < n_in; ++i) din[i] = 0.0f;
  for (int o = 0; o < n_out; ++o)
    axpy_n(dout[o], w + static_cast<std::int64_t>(o) * n_in, n_in, din);
}

void dense_bwd_weights(const float* in, int n_in, const float* dout, int n_out,
                       float* dw, float* dbias) {
  for (int o = 0; o < n_out; ++o) {
    dbias[o] += dout[o];
    axpy_n(dout[o], in, n_in, dw + static_cast<std::int64_t>(o) * n_in);
  }
}

void relu_fwd(const float* x, std::int64_t n, float* y) {
  const __m256 zv = _mm256_setzero_ps();
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_max_ps(zv, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd(const float* y, const float* dy, std::int64_t n, float* dx) {
  const __m256 zv = _mm256_setzero_ps();
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(y + i), zv, _CMP_GT_OQ);
    _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
  }
  for (; i < n; ++i) dx[i] = y[i] > 0.0f ? dy[i] : 0.0f;
}

void avgpool2_fwd(const float* in, int c, int len, float* out) {
  const int half_len = len / 2;
  for (int ch = 0; ch < c; ++ch) {
    const float* irow = in + static_cast<std::int64_t>(ch) * len;
    float* orow = out + static_cast<std::int64_t>(ch) * half_len;
    for (int l = 0; l < half_len; ++l)
      orow[l] = (irow[2 * l] + irow[2 * l + 1]) * 0.5f;
  }
}

void avgpool2_bwd(const float* dout, int c, int len, float* din) {
  const int half_len = len / 2;
  for (int ch = 0; ch < c; ++ch) {
    const float* drow = dout + static_cast<std::int64_t>(ch) * half_len;
    float* irow = din + static_cast<std::int64_t>(ch) * len;
    for (int l = 0; l < half_len; ++l) {
      const float d = drow[l] * 0.5f;
      irow[2 * l] = d;
      irow[2 * l + 1] = d;
    }
  }
}

void add(const float* a, const float* b, std::int64_t n, float* out) {
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i,
                     _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void axpy(float a, const float* x, std::int64_t n, float* y) { axpy_n(a, x, n, y); }

float dot(const float* a, const float* b, std::int64_t n) { return dot_n(a, b, n); }

void adam_step(float* p, const float* g, float* m, float* v, std::int64_t n,
               float lr, float beta1, float beta2, float eps, float b1t,
               float b2t) {
  const __m256 b1 = _mm256_set1_ps(beta1);
  const __m256 b2 = _mm256_set1_ps(beta2);
  const __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 c1 = _mm256_set1_ps(1.0f / (1.0f - b1t));
  const __m256 c2 = _mm256_set1_ps(1.0f / (1.0f - b2t));
  const __m256 lrv = _mm256_set1_ps(lr);
  const __m256 epsv = _mm256_set1_ps(eps);
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_fmadd_ps(ob1, gv, _mm256_mul_ps(b1, _mm256_loadu_ps(m + i)));
    __m256 vv = _mm256_fmadd_ps(ob2, _mm256_mul_ps(gv, gv),
                                _mm256_mul_ps(b2, _mm256_loadu_ps(v + i)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mh = _mm256_mul_ps(mv, c1);
    const __m256 vh = _mm256_mul_ps(vv, c2);
    const __m256 den = _mm256_add_ps(_mm256_sqrt_ps(vh), epsv);
    const __m256 upd = _mm256_div_ps(_mm256_mul_ps(lrv, mh), den);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
  }
  const float ic1 = 1.0f / (1.0f - b1t);
  const float ic2 = 1.0f / (1.0f - b2t);
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * ic1) / (std::sqrt(v[i] * ic2) + eps);
  }
}

}  // namespace oswa::kernels::avx2

#else  // no AVX2 target support: keep the symbols, delegate to scalar

#include "oswa/kernels/kernels.hpp"

namespace oswa::kernels::avx2 {

void conv1d_fwd(const float* in, int c_in, int len, const float* w,
                const float* bias, int c_out, int k, float* out) {
  scalar::conv1d_fwd(in, c_in, len, w, bias, c_out, k, out);
}
void conv1d_bwd_data(const float* dout, int c_out, int len, const float* w,
                     int c_in, int k, float* din) {
  scalar::conv1d_bwd_data(dout, c_out, len, w, c_in, k, din);
}
void conv1d_bwd_weights(const float* in, int c_in, int len, const float* dout,
                        int c_out, int k, float* dw, float* dbias) {
  scalar::conv1d_bwd_weights(in, c_in, len, dout, c_out, k, dw, dbias);
}
void dense_fwd(const float* in, int n_in, const float* w, const float* bias,
               int n_out, float* out) {
  scalar::dense_fwd(in, n_in, w, bias, n_out, out);
}
void dense_bwd_data(const float* dout, int n_out, const float* w, int n_in,
                    float* din) {
  scalar::dense_bwd_data(dout, n_out, w, n_in, din);
}
void dense_bwd_weights(const float* in, int n_in, const float* dout, int n_out,
                       float* dw, float* dbias) {
  scalar::dense_bwd_weights(in, n_in, dout, n_out, dw, dbias);
}
void relu_fwd(const float* x, std::int64_t n, float* y) {
  scalar::relu_fwd(x, n, y);
}
void relu_bwd(const float* y, const float* dy, std::int64_t n, float* dx) {
  scalar::relu_bwd(y, dy, n, dx);
}
void avgpool2_fwd(const float* in, int c, int len, float* out) {
  scalar::avgpool2_fwd(in, c, len, out);
}
void avgpool2_bwd(const float* dout, int c, int len, float* din) {
  scalar::avgpool2_bwd(dout, c, len, din);
}
void add(const float* a, const float* b, std::int64_t n, float* out) {
  scalar::add(a, b, n, out);
}
void axpy(float a, const float* x, std::int64_t n, float* y) {
  scalar::axpy(a, x, n, y);
}
float dot(const float* a, const float* b, std::int64_t n) {
  return scalar::dot(a, b, n);
}
void adam_step(float* p, const float* g, float* m, float* v, std::int64_t n,
               float lr, float beta1, float beta2, float eps, float b1t,
               float b2t) {
  scalar::adam_step(p, g, m, v, n, lr, beta1, beta2, eps, b1t, b2t);
}

}  // namespace oswa::kernels::avx2

#endif
