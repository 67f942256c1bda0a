#include "oswa/kernels/kernels.hpp"

#include <cstring>

namespace oswa::kernels {

namespace avx2 {
void conv1d_fwd(const float*, int, int, const float*, const float*, int, int,
                float*);
void conv1d_bwd_data(const float*, int, int, const float*, int, int, float*);
void conv1d_bwd_weights(const float*, int, int, const float*, int, int, float*,
                        float*);
void dense_fwd(const float*, int, const float*, const float*, int, float*);
void dense_bwd_data(const float*, int, const float*, int, float*);
void dense_bwd_weights(const float*, int, const float*, int, float*, float*);
void relu_fwd(const float*, std::int64_t, float*);
void relu_bwd(const float*, const float*, std::int64_t, float*);
void avgpool2_fwd(const float*, int, int, float*);
void avgpool2_bwd(const float*, int, int, float*);
void add(const float*, const float*, std::int64_t, float*);
void axpy(float, const float*, std::int64_t, float*);
float dot(const float*, const float*, std::int64_t);
void adam_step(float*, const float*, float*, float*, std::int64_t, float, float,
               float, float, float, float);
}  // namespace avx2

namespace {

struct Ops {
  decltype(&scalar::conv1d_fwd<float>) conv1d_fwd;
  decltype(&scalar::conv1d_bwd_data<float>) conv1d_bwd_data;
  decltype(&scalar::conv1d_bwd_weights<float>) conv1d_bwd_weights;
  decltype(&scalar::dense_fwd<float>) dense_fwd;
  decltype(&scalar::dense_bwd_data<float>) dense_bwd_data;
  decltype(&scalar::dense_bwd_weights<float>) dense_bwd_weights;
  decltype(&scalar::relu_fwd<float>) relu_fwd;
  decltype(&scalar::relu_bwd<float>) relu_bwd;
  decltype(&scalar::avgpool2_fwd<float>) avgpool2_fwd;
  decltype(&scalar::avgpool2_bwd<float>) avgpool2_bwd;
  decltype(&scalar::add<float>) add;
  decltype(&scalar::axpy<float>) axpy;
  decltype(&scalar::dot<float>) dot;
  decltype(&scalar::adam_step<float>) adam_step;
  const char* name;
};

constexpr Ops kScalarOps = {
    &scalar::conv1d_fwd<float>,    &scalar::conv1d_bwd_data<float>,
    &scalar::conv1d_bwd_weights<float>, &scalar::dense_fwd<float>,
    &scalar::dense_bwd_data<float>, &scalar::dense_bwd_weights<float>,
    &scalar::relu_fwd<float>,      &scalar::relu_bwd<float>,
    &scalar::avgpool2_fwd<float>,  &scalar::avgpool2_bwd<float>,
    &scalar::add<float>,           &scalar::axpy<float>,
    &scalar::dot<float>,           &scalar::adam_step<float>,
    "scalar"};

constexpr Ops kAvx2Ops = {
    &avx2::conv1d_fwd,    &avx2::conv1d_bwd_data, &avx2::conv1d_bwd_weights,
    &avx2::dense_fwd,     &avx2::dense_bwd_data,  &avx2::dense_bwd_weights,
    &avx2::relu_fwd,      &avx2::relu_bwd,        &avx2::avgpool2_fwd,
    &avx2::avgpool2_bwd,  &avx2::add,             &avx2::axpy,
    &avx2::dot,           &avx2::adam_step,       "avx2"};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* g_ops = cpu_has_avx2() ? &kAvx2Ops : &kScalarOps;

}  // namespace

const char* active_backend() { return g_ops->name; }

bool force_backend(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    g_ops = &kScalarOps;
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    if (!cpu_has_avx2()) return false;
    g_ops = &kAvx2Ops;
    return true;
  }
  return false;
}

void conv1d_fwd(const float* in, int c_in, int len, const float* w,
                const float* bias, int c_out, int k, float* out) {
  g_ops->conv1d_fwd(in, c_in, len, w, bias, c_out, k, out);
}
void conv1d_bwd_data(const float* dout, int c_out, int len, const float* w,
                     int c_in, int k, float* din) {
  g_ops->conv1d_bwd_data(dout, c_out, len, w, c_in, k, din);
}
void conv1d_bwd_weights(const float* in, int c_in, int len, const float* dout,
                        int c_out, int k, float* dw, float* dbias) {
  g_ops->conv1d_bwd_weights(in, c_in, len, dout, c_out, k, dw, dbias);
}
void dense_fwd(const float* in, int n_in, const float* w, const float* bias,
               int n_out, float* out) {
  g_ops->dense_fwd(in, n_in, w, bias, n_out, out);
}
void dense_bwd_data(const float* dout, int n_out, const float* w, int n_in,
                    float* din) {
  g_ops->dense_bwd_data(dout, n_out, w, n_in, din);
}
void dense_bwd_weights(const float* in, int n_in, const float* dout, int n_out,
                       float* dw, float* dbias) {
  g_ops->dense_bwd_weights(in, n_in, dout, n_out, dw, dbias);
}
void relu_fwd(const float* x, std::int64_t n, float* y) {
  g_ops->relu_fwd(x, n, y);
}
void relu_bwd(const float* y, const float* dy, std::int64_t n, float* dx) {
  g_ops->relu_bwd(y, dy, n, dx);
}
void avgpool2_fwd(const float* in, int c, int len, float* out) {
  g_ops->avgpool2_fwd(in, c, len, out);
}
void avgpool2_bwd(const float* dout, int c, int len, float* din) {
  g_ops->avgpool2_bwd(dout, c, len, din);
}
void add(const float* a, const float* b, std::int64_t n, float* out) {
  g_ops->add(a, b, n, out);
}
void axpy(float a, const float* x, std::int64_t n, float* y) {
  g_ops->axpy(a, x, n, y);
}
float dot(const float* a, const float* b, std::int64_t n) {
  return g_ops->dot(a, b, n);
}
void adam_step(float* p, const float* g, float* m, float* v, std::int64_t n,
               float lr, float beta1, float beta2, float eps, float b1t,
               float b2t) {
  g_ops->adam_step(p, g, m, v, n, lr, beta1, beta2, eps, b1t, b2t);
}

}  // namespace oswa::kernels
